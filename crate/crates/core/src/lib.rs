//! Numerical library for bounded positive solutions of the one-dimensional
//! fractional Dirichlet problem on the half-line.
//!
//! The crate builds solutions of `(-Δ)^s u = f(u)` on `(0, ∞)` with `u = 0`
//! on `(-∞, 0]` by monotone iteration between ordered sub- and supersolutions,
//! and verifies the explicit identities attached to such solutions at desk
//! scale: constancy of the nonlocal energy, the boundary-derivative law
//! `ℓ₀ = √(2F(ρ))/Γ(1+s)`, the constant `K(s) = Γ(1+s)²/2` linking them, and
//! the dimension-reduction identity for the kernel normalization.
//!
//! Module map:
//! - [`specfun`]: Gamma/Beta, kernel normalization `c(N,s)`, the reduction
//!   integral, and `K(s)` by closed form and by direct singular quadrature.
//! - [`model`]: nonlinearities `f`, their primitives, the admissibility
//!   condition on `F`, and the `δ`-regularization used when `f(0) < 0`.
//! - [`profiles`]: sampled solutions with analytic boundary (`ℓ₀ x^s`) and
//!   far-field (`ρ - C x^{-2s}`) closures, plus evaluation anywhere.
//! - [`flap`]: pointwise fractional Laplacian by singular quadrature and the
//!   dense discrete operator on uniform interval grids.
//! - [`solver`]: interval solves, maximal solutions by monotone iteration,
//!   continuation to the half-line, subsolutions, and uniqueness probes.
//! - [`energy`]: the nonlocal energy `E(a)` and the `ℓ₀` law.

pub mod energy;
pub mod flap;
pub mod model;
pub mod profiles;
pub mod solver;
pub mod specfun;

pub(crate) mod quad;
