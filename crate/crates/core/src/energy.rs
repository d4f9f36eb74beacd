//! Nonlocal energy evaluation (in progress).
