//! Sampled solutions with analytic closures on both ends, plus evaluation
//! anywhere on the line.
//!
//! A [`HalfLineProfile`] carries samples on `(0, L]`, the boundary closure
//! `ℓ₀ x^s` below its first node, and the far-field closure `ρ - C x^{-2s}`
//! beyond `L`. An [`IntervalProfile`] carries samples on a uniform interior
//! grid of `(a, b)` with a constant exterior datum. [`AnalyticProfile`] wraps
//! a closed-form function with declared far-field models; it backs synthetic
//! operator checks and the subsolution catalog.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::specfun::FracOrder;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("nodes and values must have equal positive length ({nodes} vs {values})")]
    LengthMismatch { nodes: usize, values: usize },
    #[error("nodes must be strictly increasing and finite")]
    BadNodes,
    #[error("node {0} lies outside the admissible range {1}")]
    NodeOutOfRange(f64, String),
    #[error("interior grid is not uniform: spacing deviates by {0:.3e}")]
    NonuniformGrid(f64),
    #[error("closure parameter {name} = {value} is invalid")]
    BadClosure { name: &'static str, value: f64 },
    #[error("profile file format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Order(#[from] crate::specfun::SpecfunError),
}

/// Shape-preserving cubic slopes (Fritsch-Carlson, nonuniform variant).
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n == 1 {
        return m;
    }
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        m[0] = d[0];
        m[1] = d[0];
        return m;
    }
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    m[0] = edge_slope(h[0], h[1], d[0], d[1]);
    m[n - 1] = edge_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    m
}

fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let mut m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        m = 0.0;
    } else if d0 * d1 < 0.0 && m.abs() > 3.0 * d0.abs() {
        m = 3.0 * d0;
    }
    m
}

fn pchip_eval(x: &[f64], y: &[f64], m: &[f64], q: f64) -> f64 {
    let n = x.len();
    if n == 1 {
        return y[0];
    }
    let i = match x.binary_search_by(|v| v.total_cmp(&q)) {
        Ok(i) => return y[i],
        Err(0) => 0,
        Err(i) if i >= n => n - 2,
        Err(i) => i - 1,
    };
    let h = x[i + 1] - x[i];
    let t = (q - x[i]) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    y[i] * (2.0 * t3 - 3.0 * t2 + 1.0)
        + m[i] * h * (t3 - 2.0 * t2 + t)
        + y[i + 1] * (-2.0 * t3 + 3.0 * t2)
        + m[i + 1] * h * (t3 - t2)
}

fn pchip_derivative(x: &[f64], y: &[f64], m: &[f64], q: f64) -> f64 {
    let n = x.len();
    if n == 1 {
        return 0.0;
    }
    let i = match x.binary_search_by(|v| v.total_cmp(&q)) {
        Ok(i) => return m[i],
        Err(0) => 0,
        Err(i) if i >= n => n - 2,
        Err(i) => i - 1,
    };
    let h = x[i + 1] - x[i];
    let t = (q - x[i]) / h;
    (y[i] * (6.0 * t * t - 6.0 * t) / h)
        + m[i] * (3.0 * t * t - 4.0 * t + 1.0)
        + y[i + 1] * (-6.0 * t * t + 6.0 * t) / h
        + m[i + 1] * (3.0 * t * t - 2.0 * t)
}

/// Far-field description used to integrate the kernel in closed form beyond
/// the covered interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FarModel {
    /// `u(y) = c`
    Const(f64),
    /// `u(y) = rho - coef * (y - center)^{-decay}`
    InverseTail { rho: f64, coef: f64, decay: f64, center: f64 },
    /// `u(y) = coef * y^{pow}`, `pow < 2s`
    Power { coef: f64, pow: f64 },
}

impl FarModel {
    pub(crate) fn eval(&self, y: f64) -> f64 {
        match *self {
            FarModel::Const(c) => c,
            FarModel::InverseTail { rho, coef, decay, center } => rho - coef * (y - center).abs().powf(-decay),
            FarModel::Power { coef, pow } => coef * y.powf(pow),
        }
    }
}

/// Sampled solution of the half-line problem with analytic closures.
#[derive(Debug, Clone)]
pub struct HalfLineProfile {
    s: FracOrder,
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    ell0: f64,
    rho_tail: f64,
    c_tail: f64,
    l: f64,
    solution_shaped: bool,
}

impl HalfLineProfile {
    /// Structural validation: positive strictly increasing nodes ending at
    /// `L`, matching values, finite closures. Closure continuity and
    /// monotonicity are properties of solver output, exposed through
    /// [`Self::closure_gaps`] and [`Self::is_solution_shaped`] rather than
    /// enforced here, so that externally supplied (possibly corrupted)
    /// profiles can still be loaded and diagnosed.
    pub fn new(
        s: FracOrder,
        nodes: Vec<f64>,
        values: Vec<f64>,
        ell0: f64,
        rho_tail: f64,
        c_tail: f64,
        l: f64,
    ) -> Result<Self, ProfileError> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(ProfileError::LengthMismatch {
                nodes: nodes.len(),
                values: values.len(),
            });
        }
        if !nodes.windows(2).all(|w| w[0] < w[1] && w[1].is_finite()) || !nodes[0].is_finite() {
            return Err(ProfileError::BadNodes);
        }
        if nodes[0] <= 0.0 {
            return Err(ProfileError::NodeOutOfRange(nodes[0], "(0, L]".into()));
        }
        let last = *nodes.last().unwrap();
        if !(l > 0.0) || (last - l).abs() > 1e-9 * l.max(1.0) {
            return Err(ProfileError::NodeOutOfRange(last, format!("last node must equal L = {l}")));
        }
        for (name, value) in [("ell0", ell0), ("rho_tail", rho_tail), ("c_tail", c_tail)] {
            if !value.is_finite() {
                return Err(ProfileError::BadClosure { name, value });
            }
        }
        if ell0 < 0.0 {
            return Err(ProfileError::BadClosure { name: "ell0", value: ell0 });
        }
        let slopes = pchip_slopes(&nodes, &values);
        let solution_shaped = values.windows(2).all(|w| w[0] <= w[1])
            && values.iter().all(|&v| (-1e-12..=rho_tail + 1e-12).contains(&v));
        Ok(HalfLineProfile {
            s,
            nodes,
            values,
            slopes,
            ell0,
            rho_tail,
            c_tail,
            l,
            solution_shaped,
        })
    }

    pub fn order(&self) -> FracOrder {
        self.s
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn ell0(&self) -> f64 {
        self.ell0
    }
    pub fn rho_tail(&self) -> f64 {
        self.rho_tail
    }
    pub fn c_tail(&self) -> f64 {
        self.c_tail
    }
    pub fn truncation(&self) -> f64 {
        self.l
    }

    /// Nondecreasing values inside `[0, rho_tail]`.
    pub fn is_solution_shaped(&self) -> bool {
        self.solution_shaped
    }

    /// Continuity defects of the two closures: `|ℓ₀ x₀^s - u(x₀)|` at the
    /// first node and `|u(L) - (ρ - C L^{-2s})|` at the truncation radius.
    pub fn closure_gaps(&self) -> (f64, f64) {
        let s = self.s.get();
        let near = (self.ell0 * self.nodes[0].powf(s) - self.values[0]).abs();
        let tail = (self.values[self.values.len() - 1]
            - (self.rho_tail - self.c_tail * self.l.powf(-2.0 * s)))
        .abs();
        (near, tail)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x < self.nodes[0] {
            self.ell0 * x.powf(self.s.get())
        } else if x <= self.l {
            pchip_eval(&self.nodes, &self.values, &self.slopes, x)
        } else {
            self.rho_tail - self.c_tail * x.powf(-2.0 * self.s.get())
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let s = self.s.get();
        if x <= 0.0 {
            0.0
        } else if x < self.nodes[0] {
            self.ell0 * s * x.powf(s - 1.0)
        } else if x <= self.l {
            pchip_derivative(&self.nodes, &self.values, &self.slopes, x)
        } else {
            2.0 * s * self.c_tail * x.powf(-2.0 * s - 1.0)
        }
    }

    pub(crate) fn cover(&self) -> (f64, f64) {
        (0.0, self.l)
    }

    pub(crate) fn kinks(&self) -> Vec<f64> {
        vec![0.0, self.nodes[0], self.l]
    }

    pub(crate) fn far_left(&self) -> FarModel {
        FarModel::Const(0.0)
    }

    pub(crate) fn far_right(&self) -> FarModel {
        FarModel::InverseTail {
            rho: self.rho_tail,
            coef: self.c_tail,
            decay: 2.0 * self.s.get(),
            center: 0.0,
        }
    }

    /// Writes the sample table as `x,u` CSV rows with closure parameters in a
    /// JSON sidecar.
    pub fn save(&self, csv_path: &Path, sidecar_path: &Path) -> Result<(), ProfileError> {
        save_csv(csv_path, &self.nodes, &self.values)?;
        let sidecar = Sidecar::Halfline {
            s: self.s.get(),
            ell0: self.ell0,
            rho_tail: self.rho_tail,
            c_tail: self.c_tail,
            l: self.l,
        };
        let mut file = std::fs::File::create(sidecar_path)?;
        file.write_all(serde_json::to_string_pretty(&sidecar)?.as_bytes())?;
        file.write_all(b"\n")?;
        Ok(())
    }
}

/// Sampled solution on a finite interval with constant exterior datum.
#[derive(Debug, Clone)]
pub struct IntervalProfile {
    s: FracOrder,
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
    exterior: f64,
    // interpolation arrays extended by the boundary anchors (a, exterior), (b, exterior)
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl IntervalProfile {
    pub fn new(
        s: FracOrder,
        a: f64,
        b: f64,
        nodes: Vec<f64>,
        values: Vec<f64>,
        exterior: f64,
    ) -> Result<Self, ProfileError> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(ProfileError::LengthMismatch {
                nodes: nodes.len(),
                values: values.len(),
            });
        }
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(ProfileError::BadNodes);
        }
        if !nodes.windows(2).all(|w| w[0] < w[1]) {
            return Err(ProfileError::BadNodes);
        }
        if nodes[0] <= a || *nodes.last().unwrap() >= b {
            return Err(ProfileError::NodeOutOfRange(nodes[0], format!("({a}, {b})")));
        }
        let h = nodes.get(1).map(|x1| x1 - nodes[0]).unwrap_or(b - a);
        let h0 = nodes[0] - a;
        let hn = b - *nodes.last().unwrap();
        let mut dev: f64 = (h0 - h).abs().max((hn - h).abs());
        for w in nodes.windows(2) {
            dev = dev.max((w[1] - w[0] - h).abs());
        }
        if dev > 1e-12 * (b - a).max(1.0) {
            return Err(ProfileError::NonuniformGrid(dev));
        }
        let mut xs = Vec::with_capacity(nodes.len() + 2);
        let mut ys = Vec::with_capacity(nodes.len() + 2);
        xs.push(a);
        ys.push(exterior);
        xs.extend_from_slice(&nodes);
        ys.extend_from_slice(&values);
        xs.push(b);
        ys.push(exterior);
        let slopes = pchip_slopes(&xs, &ys);
        Ok(IntervalProfile {
            s,
            a,
            b,
            nodes,
            values,
            exterior,
            xs,
            ys,
            slopes,
        })
    }

    /// Builds the canonical uniform grid `a + i h`, `i = 1..=n`, `h = (b-a)/(n+1)`.
    pub fn uniform(s: FracOrder, a: f64, b: f64, values: Vec<f64>, exterior: f64) -> Result<Self, ProfileError> {
        let n = values.len();
        let h = (b - a) / (n as f64 + 1.0);
        let nodes = (1..=n).map(|i| a + i as f64 * h).collect();
        Self::new(s, a, b, nodes, values, exterior)
    }

    pub fn order(&self) -> FracOrder {
        self.s
    }
    pub fn bounds(&self) -> (f64, f64) {
        (self.a, self.b)
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn exterior(&self) -> f64 {
        self.exterior
    }
    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / (self.nodes.len() as f64 + 1.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            self.exterior
        } else {
            pchip_eval(&self.xs, &self.ys, &self.slopes, x)
        }
    }

    pub(crate) fn cover(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub(crate) fn kinks(&self) -> Vec<f64> {
        vec![self.a, self.b]
    }

    pub fn save(&self, csv_path: &Path, sidecar_path: &Path) -> Result<(), ProfileError> {
        save_csv(csv_path, &self.nodes, &self.values)?;
        let sidecar = Sidecar::Interval {
            s: self.s.get(),
            a: self.a,
            b: self.b,
            exterior: self.exterior,
        };
        let mut file = std::fs::File::create(sidecar_path)?;
        file.write_all(serde_json::to_string_pretty(&sidecar)?.as_bytes())?;
        file.write_all(b"\n")?;
        Ok(())
    }
}

type EvalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closed-form profile with declared smoothness breakpoints and far-field
/// models. Backs synthetic operator checks and the subsolution catalog.
#[derive(Clone)]
pub struct AnalyticProfile {
    name: String,
    s: FracOrder,
    f: EvalFn,
    kinks: Vec<f64>,
    cover: (f64, f64),
    left: FarModel,
    right: FarModel,
}

impl fmt::Debug for AnalyticProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticProfile")
            .field("name", &self.name)
            .field("s", &self.s)
            .field("cover", &self.cover)
            .finish()
    }
}

impl AnalyticProfile {
    pub fn new(
        name: impl Into<String>,
        s: FracOrder,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        kinks: Vec<f64>,
        cover: (f64, f64),
        left: FarModel,
        right: FarModel,
    ) -> Self {
        AnalyticProfile {
            name: name.into(),
            s,
            f: Arc::new(f),
            kinks,
            cover,
            left,
            right,
        }
    }

    /// The boundary power `x ↦ x_+^s`, annihilated by the operator on `(0, ∞)`.
    pub fn boundary_power(s: FracOrder) -> Self {
        let sv = s.get();
        AnalyticProfile::new(
            "boundary-power",
            s,
            move |x: f64| if x > 0.0 { x.powf(sv) } else { 0.0 },
            vec![0.0],
            (0.0, 0.0),
            FarModel::Const(0.0),
            FarModel::Power { coef: 1.0, pow: sv },
        )
    }

    /// Compactly supported bump `amp (1 - ((x-c)/r)^2)_+^s`.
    pub fn bubble(s: FracOrder, center: f64, radius: f64, amp: f64) -> Self {
        let sv = s.get();
        AnalyticProfile::new(
            format!("bubble[x0={center},r={radius},amp={amp}]"),
            s,
            move |x: f64| {
                let w = 1.0 - ((x - center) / radius).powi(2);
                if w > 0.0 {
                    amp * w.powf(sv)
                } else {
                    0.0
                }
            },
            vec![center - radius, center + radius],
            (center - radius, center + radius),
            FarModel::Const(0.0),
            FarModel::Const(0.0),
        )
    }

    /// Smooth nondecreasing profile equal to 0 on `(-∞, 0]` and `1 - x^{-2s}`
    /// for `x >= 2`, bridged by a monotone cubic on `[0, 2]`.
    pub fn power_tail(s: FracOrder) -> Self {
        Self::power_tail_shifted(s, 0.0)
    }

    /// The power-tail profile translated right by `shift >= 0`.
    pub fn power_tail_shifted(s: FracOrder, shift: f64) -> Self {
        let sv = s.get();
        let v2 = 1.0 - 2f64.powf(-2.0 * sv);
        let m2 = 2.0 * sv * 2f64.powf(-2.0 * sv - 1.0);
        let f = move |x: f64| {
            let x = x - shift;
            if x <= 0.0 {
                0.0
            } else if x >= 2.0 {
                1.0 - x.powf(-2.0 * sv)
            } else {
                // Hermite bridge: value/slope (0,0) at 0 and (v2, m2) at 2
                let t = x / 2.0;
                let t2 = t * t;
                let t3 = t2 * t;
                v2 * (-2.0 * t3 + 3.0 * t2) + m2 * 2.0 * (t3 - t2)
            }
        };
        AnalyticProfile::new(
            format!("power-tail[shift={shift}]"),
            s,
            f,
            vec![shift, shift + 2.0],
            (shift, shift + 2.0),
            FarModel::Const(0.0),
            FarModel::InverseTail {
                rho: 1.0,
                coef: 1.0,
                decay: 2.0 * sv,
                center: shift,
            },
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn order(&self) -> FracOrder {
        self.s
    }
    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    pub(crate) fn cover(&self) -> (f64, f64) {
        self.cover
    }
    pub(crate) fn kinks(&self) -> Vec<f64> {
        self.kinks.clone()
    }
    pub(crate) fn far_left(&self) -> FarModel {
        self.left
    }
    pub(crate) fn far_right(&self) -> FarModel {
        self.right
    }
}

/// Union of the profile kinds accepted by the operator and energy routines.
#[derive(Debug, Clone)]
pub enum Profile {
    HalfLine(HalfLineProfile),
    Interval(IntervalProfile),
    Analytic(AnalyticProfile),
}

impl Profile {
    pub fn order(&self) -> FracOrder {
        match self {
            Profile::HalfLine(p) => p.order(),
            Profile::Interval(p) => p.order(),
            Profile::Analytic(p) => p.order(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::HalfLine(p) => p.eval(x),
            Profile::Interval(p) => p.eval(x),
            Profile::Analytic(p) => p.eval(x),
        }
    }

    /// Interval outside of which the far-field models apply.
    pub(crate) fn cover(&self) -> (f64, f64) {
        match self {
            Profile::HalfLine(p) => p.cover(),
            Profile::Interval(p) => p.cover(),
            Profile::Analytic(p) => p.cover(),
        }
    }

    pub(crate) fn kinks(&self) -> Vec<f64> {
        match self {
            Profile::HalfLine(p) => p.kinks(),
            Profile::Interval(p) => p.kinks(),
            Profile::Analytic(p) => p.kinks(),
        }
    }

    pub(crate) fn far_left(&self) -> FarModel {
        match self {
            Profile::HalfLine(p) => p.far_left(),
            Profile::Interval(p) => FarModel::Const(p.exterior()),
            Profile::Analytic(p) => p.far_left(),
        }
    }

    pub(crate) fn far_right(&self) -> FarModel {
        match self {
            Profile::HalfLine(p) => p.far_right(),
            Profile::Interval(p) => FarModel::Const(p.exterior()),
            Profile::Analytic(p) => p.far_right(),
        }
    }

    /// Interior of the equation domain, used to validate evaluation points.
    pub fn equation_domain(&self) -> (f64, f64) {
        match self {
            Profile::HalfLine(_) => (0.0, f64::INFINITY),
            Profile::Interval(p) => p.bounds(),
            Profile::Analytic(p) => (p.cover.0, f64::INFINITY),
        }
    }
}

/// Evaluation dispatch for profile references in generic call sites.
pub fn eval_profile(p: &Profile, x: f64) -> f64 {
    p.eval(x)
}

/// Strict node-wise increase plus the slide comparison `u(x - λ) <= u(x)` on
/// a test grid for several shifts.
pub fn monotonicity_check(p: &HalfLineProfile) -> bool {
    let strictly_increasing = p.values().windows(2).all(|w| w[0] < w[1]);
    if !strictly_increasing {
        return false;
    }
    let l = p.truncation();
    let m = 256;
    for lambda in [0.1, 1.0, 10.0] {
        for i in 0..=m {
            let x = 2.0 * l * i as f64 / m as f64;
            if p.eval(x - lambda) > p.eval(x) + 1e-12 {
                return false;
            }
        }
    }
    true
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Sidecar {
    Halfline {
        s: f64,
        ell0: f64,
        rho_tail: f64,
        c_tail: f64,
        #[serde(rename = "L")]
        l: f64,
    },
    Interval {
        s: f64,
        a: f64,
        b: f64,
        exterior: f64,
    },
}

fn save_csv(path: &Path, nodes: &[f64], values: &[f64]) -> Result<(), ProfileError> {
    let mut out = String::from("x,u\n");
    for (x, u) in nodes.iter().zip(values) {
        out.push_str(&format!("{x:.16e},{u:.16e}\n"));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn load_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), ProfileError> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if lineno == 0 {
            if line != "x,u" {
                return Err(ProfileError::Format(format!("expected header 'x,u', got '{line}'")));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let (xs, us) = line
            .split_once(',')
            .ok_or_else(|| ProfileError::Format(format!("line {}: expected 'x,u'", lineno + 1)))?;
        let x: f64 = xs
            .trim()
            .parse()
            .map_err(|e| ProfileError::Format(format!("line {}: {e}", lineno + 1)))?;
        let u: f64 = us
            .trim()
            .parse()
            .map_err(|e| ProfileError::Format(format!("line {}: {e}", lineno + 1)))?;
        nodes.push(x);
        values.push(u);
    }
    Ok((nodes, values))
}

/// Loads a profile from the CSV + JSON sidecar pair. Structural defects are
/// hard errors; breached soft invariants (closure continuity, monotonicity)
/// are returned as warnings so corrupted inputs can still be diagnosed
/// downstream.
pub fn load_profile(csv_path: &Path, sidecar_path: &Path) -> Result<(Profile, Vec<String>), ProfileError> {
    let (nodes, values) = load_csv(csv_path)?;
    let sidecar: Sidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path)?)?;
    let mut warnings = Vec::new();
    match sidecar {
        Sidecar::Halfline {
            s,
            ell0,
            rho_tail,
            c_tail,
            l,
        } => {
            let s = FracOrder::new(s)?;
            let p = HalfLineProfile::new(s, nodes, values, ell0, rho_tail, c_tail, l)?;
            let (near, tail) = p.closure_gaps();
            if near > 1e-6 * rho_tail.abs().max(1e-12) {
                warnings.push(format!("near-zero closure discontinuity {near:.3e} at the first node"));
            }
            if tail > 1e-8 {
                warnings.push(format!("tail closure discontinuity {tail:.3e} at L"));
            }
            if !p.is_solution_shaped() {
                warnings.push("values are not nondecreasing inside [0, rho_tail]".into());
            }
            Ok((Profile::HalfLine(p), warnings))
        }
        Sidecar::Interval { s, a, b, exterior } => {
            let s = FracOrder::new(s)?;
            let p = IntervalProfile::new(s, a, b, nodes, values, exterior)?;
            Ok((Profile::Interval(p), warnings))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(s: f64) -> FracOrder {
        FracOrder::new(s).unwrap()
    }

    /// Samples `rho - c x^{-2s}` on `[x0, L]` with `c` chosen so the near
    /// closure `ell0 x^s` joins continuously at `x0`; both closure gaps are
    /// then exactly zero.
    fn synthetic_halfline(s: f64) -> HalfLineProfile {
        let (ell0, rho, l, x0) = (1.0f64, 1.0f64, 10.0f64, 0.5f64);
        let c = (rho - ell0 * x0.powf(s)) * x0.powf(2.0 * s);
        let n = 200;
        let nodes: Vec<f64> = (0..=n).map(|i| x0 + (l - x0) * i as f64 / n as f64).collect();
        let values: Vec<f64> = nodes.iter().map(|&x| rho - c * x.powf(-2.0 * s)).collect();
        HalfLineProfile::new(order(s), nodes, values, ell0, rho, c, l).unwrap()
    }

    #[test]
    fn halfline_eval_regions() {
        let p = synthetic_halfline(0.5);
        assert_eq!(p.eval(-1.0), 0.0);
        assert_eq!(p.eval(0.0), 0.0);
        // closure below the first node
        let x = 1e-6;
        assert!((p.eval(x) - 1e-3).abs() < 1e-18);
        // tail beyond L with rho = c = 1 would read 1 - 1/x at s = 1/2
        let q = HalfLineProfile::new(order(0.5), vec![1.0, 2.0], vec![0.3, 0.5], 0.3, 1.0, 1.0, 2.0).unwrap();
        let l2 = 2.0 * q.truncation();
        assert!((q.eval(l2) - (1.0 - 1.0 / l2)).abs() < 1e-15);
    }

    #[test]
    fn halfline_closure_gaps_vanish_on_consistent_data() {
        let p = synthetic_halfline(0.75);
        let (near, tail) = p.closure_gaps();
        assert!(near < 1e-14);
        assert!(tail < 1e-14);
        assert!(p.is_solution_shaped());
    }

    #[test]
    fn halfline_structural_validation() {
        let s = order(0.5);
        assert!(HalfLineProfile::new(s, vec![], vec![], 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(HalfLineProfile::new(s, vec![0.5, 0.4], vec![0.1, 0.2], 1.0, 1.0, 1.0, 0.4).is_err());
        assert!(HalfLineProfile::new(s, vec![-0.5, 0.4], vec![0.1, 0.2], 1.0, 1.0, 1.0, 0.4).is_err());
        // last node must sit at L
        assert!(HalfLineProfile::new(s, vec![0.5, 1.0], vec![0.1, 0.2], 1.0, 1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn interval_eval_and_exterior() {
        let s = order(0.5);
        let values = vec![0.5, 0.8, 0.5];
        let p = IntervalProfile::uniform(s, -1.0, 1.0, values, 0.0).unwrap();
        assert_eq!(p.eval(-1.5), 0.0);
        assert_eq!(p.eval(2.0), 0.0);
        assert!((p.eval(0.0) - 0.8).abs() < 1e-15);
        // continuity at the boundary: interpolation pins the exterior value
        assert!(p.eval(-1.0 + 1e-9).abs() < 1e-6);
    }

    #[test]
    fn interval_rejects_nonuniform_grid() {
        let s = order(0.5);
        let r = IntervalProfile::new(s, 0.0, 4.0, vec![1.0, 2.0, 3.1], vec![0.0; 3], 0.0);
        assert!(matches!(r, Err(ProfileError::NonuniformGrid(_))));
    }

    #[test]
    fn pchip_is_monotone_between_nodes() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&t| (t / 3.0).tanh() + 0.01 * t).collect();
        let m = pchip_slopes(&x, &y);
        for i in 0..x.len() - 1 {
            let mut prev = y[i];
            for k in 1..=50 {
                let q = x[i] + (x[i + 1] - x[i]) * k as f64 / 50.0;
                let v = pchip_eval(&x, &y, &m, q);
                assert!(v >= prev - 1e-12, "dip at {q}: {v} < {prev}");
                prev = v;
            }
        }
    }

    #[test]
    fn pchip_reproduces_data_and_stays_in_range() {
        let x = [0.0, 1.0, 2.5, 3.0, 4.7];
        let y = [0.0, 0.2, 0.21, 0.9, 1.0];
        let m = pchip_slopes(&x, &y);
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(pchip_eval(&x, &y, &m, *xi), *yi);
        }
        for i in 0..x.len() - 1 {
            for k in 0..=20 {
                let q = x[i] + (x[i + 1] - x[i]) * k as f64 / 20.0;
                let v = pchip_eval(&x, &y, &m, q);
                assert!(v >= y[i] - 1e-12 && v <= y[i + 1] + 1e-12);
            }
        }
    }

    #[test]
    fn monotonicity_check_accepts_increasing_rejects_flat() {
        let p = synthetic_halfline(0.5);
        assert!(monotonicity_check(&p));
        let flat = HalfLineProfile::new(order(0.5), vec![1.0, 2.0, 3.0], vec![0.5, 0.5, 0.5], 0.5, 0.5, 0.0, 3.0).unwrap();
        assert!(!monotonicity_check(&flat));
    }

    #[test]
    fn csv_sidecar_roundtrip_halfline() {
        let dir = std::env::temp_dir().join(format!("fraclap-prof-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = synthetic_halfline(0.65);
        let csv = dir.join("p.csv");
        let side = dir.join("p.json");
        p.save(&csv, &side).unwrap();
        let (loaded, warnings) = load_profile(&csv, &side).unwrap();
        assert!(warnings.is_empty(), "{warnings:?}");
        match loaded {
            Profile::HalfLine(q) => {
                assert_eq!(q.ell0(), p.ell0());
                assert_eq!(q.rho_tail(), p.rho_tail());
                assert_eq!(q.c_tail(), p.c_tail());
                assert_eq!(q.truncation(), p.truncation());
                for (a, b) in p.values().iter().zip(q.values()) {
                    assert!((a - b).abs() <= 1e-15 * a.abs().max(1.0));
                }
                for (a, b) in p.nodes().iter().zip(q.nodes()) {
                    assert_eq!(a, b);
                }
            }
            _ => panic!("expected half-line profile"),
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn csv_sidecar_roundtrip_interval() {
        let dir = std::env::temp_dir().join(format!("fraclap-prof-int-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = IntervalProfile::uniform(order(0.3), 0.0, 2.0, vec![0.1, 0.4, 0.2], -0.5).unwrap();
        let csv = dir.join("q.csv");
        let side = dir.join("q.json");
        p.save(&csv, &side).unwrap();
        let (loaded, _) = load_profile(&csv, &side).unwrap();
        match loaded {
            Profile::Interval(q) => {
                assert_eq!(q.exterior(), p.exterior());
                assert_eq!(q.bounds(), p.bounds());
                assert_eq!(q.values(), p.values());
            }
            _ => panic!("expected interval profile"),
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn corrupted_values_load_with_warnings() {
        let dir = std::env::temp_dir().join(format!("fraclap-prof-bad-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = synthetic_halfline(0.5);
        let scaled: Vec<f64> = p.values().iter().map(|v| v * 1.1).collect();
        let q = HalfLineProfile::new(
            order(0.5),
            p.nodes().to_vec(),
            scaled,
            p.ell0(),
            p.rho_tail(),
            p.c_tail(),
            p.truncation(),
        )
        .unwrap();
        let csv = dir.join("bad.csv");
        let side = dir.join("bad.json");
        q.save(&csv, &side).unwrap();
        let (_, warnings) = load_profile(&csv, &side).unwrap();
        assert!(!warnings.is_empty());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn power_tail_profile_values() {
        let p = AnalyticProfile::power_tail(order(0.75));
        assert_eq!(p.eval(-1.0), 0.0);
        assert!((p.eval(4.0) - 0.875).abs() < 1e-15);
        // monotone through the bridge
        let mut prev = 0.0;
        for i in 0..=400 {
            let x = 4.0 * i as f64 / 400.0;
            let v = p.eval(x);
            assert!(v >= prev - 1e-13, "bridge dips at {x}");
            prev = v;
        }
    }

    #[test]
    fn bubble_profile_values() {
        let p = AnalyticProfile::bubble(order(0.5), 5.0, 1.0, 0.3);
        assert_eq!(p.eval(5.0), 0.3);
        assert_eq!(p.eval(3.9), 0.0);
        assert_eq!(p.eval(6.1), 0.0);
    }
}
