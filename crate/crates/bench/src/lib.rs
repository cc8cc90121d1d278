//! Shared problem definitions for the criterion benches.

/// The worked example's coefficient: a(t) = -(1 + 4t + 3 cos 4t)/2.
pub fn paper_coeff(t: f64) -> f64 {
    -0.5 * (1.0 + 4.0 * t + 3.0 * (4.0 * t).cos())
}

/// Right-hand side of the worked example.
pub fn paper_rhs(t: f64, x: f64) -> f64 {
    paper_coeff(t) * x
}
