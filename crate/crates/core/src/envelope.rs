//! Running-extremum coefficient envelopes.
//!
//! Every bound formula is driven by one of these: the running Lipschitz
//! supremum L*(t), the running min/max a_*(t), a^*(t) of a linear
//! coefficient, the same extrema of the difference quotient f(s,x)/x of a
//! nonlinear right-hand side sampled over a state box, or the shifted
//! quotient around a reference trajectory.

use crate::solver::Trajectory;
use thiserror::Error;

/// Golden-section bracket width target (absolute, in t).
const REFINE_TOL: f64 = 1e-10;

/// Interior points of the pre-refinement scan in each grid cell.
const CELL_SCAN_POINTS: usize = 8;

/// Absolute tolerance of the f(t,0) = 0 hypothesis check.
const VANISH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvelopeError {
    #[error("Lipschitz function is negative at t = {t}: {value}")]
    NegativeLipschitz { t: f64, value: f64 },
    #[error("f(t, 0) = {value} at t = {t}; the zero-preserving bounds need f(t,0) = 0")]
    NonvanishingAtZero { t: f64, value: f64 },
    #[error("invalid sampling box: {0}")]
    InvalidBox(String),
    #[error("invalid envelope: {0}")]
    InvalidEnvelope(String),
    #[error("grid must contain at least two points starting at 0")]
    BadGrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeKind {
    /// Only a Lipschitz bound is known: upper = L*, lower = -L*.
    LipschitzOnly,
    /// Running min/max of a linear coefficient a(t).
    Linear,
    /// Sampled running inf/sup of f(s,x)/x over a state box.
    NonlinearSampled,
    /// Sampled running inf/sup of the shifted quotient around a trajectory.
    ShiftedSampled,
    /// Injected by the caller from a closed-form envelope.
    ClosedForm,
}

/// Running-extremum coefficient functions on a grid.
///
/// `lower[n]` is non-increasing and `upper[n]` non-decreasing in n, being
/// extrema over the growing windows [0, t_n].
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffEnvelope {
    pub times: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub kind: EnvelopeKind,
}

impl CoeffEnvelope {
    /// Inject a precomputed envelope, validating the running-extremum shape.
    pub fn from_parts(
        times: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        kind: EnvelopeKind,
    ) -> Result<Self, EnvelopeError> {
        if times.len() < 2 || times[0] != 0.0 {
            return Err(EnvelopeError::BadGrid);
        }
        if lower.len() != times.len() || upper.len() != times.len() {
            return Err(EnvelopeError::InvalidEnvelope(
                "lower/upper length must match the grid".into(),
            ));
        }
        for n in 0..times.len() {
            if lower[n] > upper[n] {
                return Err(EnvelopeError::InvalidEnvelope(format!(
                    "lower[{n}] = {} exceeds upper[{n}] = {}",
                    lower[n], upper[n]
                )));
            }
            if n > 0 && (lower[n] > lower[n - 1] || upper[n] < upper[n - 1]) {
                return Err(EnvelopeError::InvalidEnvelope(format!(
                    "running-extremum monotonicity violated at index {n}"
                )));
            }
        }
        Ok(Self { times, lower, upper, kind })
    }

    /// Closed-form envelope from explicit lower/upper functions of t.
    pub fn closed_form<L, U>(times: &[f64], lower: L, upper: U) -> Result<Self, EnvelopeError>
    where
        L: Fn(f64) -> f64,
        U: Fn(f64) -> f64,
    {
        let lo: Vec<f64> = times.iter().map(|&t| lower(t)).collect();
        let up: Vec<f64> = times.iter().map(|&t| upper(t)).collect();
        Self::from_parts(times.to_vec(), lo, up, EnvelopeKind::ClosedForm)
    }

    /// Collapse to a Lipschitz-only envelope: the running sup of |q| is
    /// exactly max(upper, -lower) for running extrema.
    pub fn to_lipschitz(&self) -> CoeffEnvelope {
        let upper: Vec<f64> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(&lo, &up)| up.max(-lo))
            .collect();
        let lower = upper.iter().map(|&u| -u).collect();
        CoeffEnvelope {
            times: self.times.clone(),
            lower,
            upper,
            kind: EnvelopeKind::LipschitzOnly,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// State interval scanned when estimating inf/sup of f(s,x)/x, with a
/// deadzone around x = 0 where the quotient is left alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingBox {
    pub x_min: f64,
    pub x_max: f64,
    pub deadzone: f64,
    pub n_x: usize,
}

impl Default for SamplingBox {
    fn default() -> Self {
        Self { x_min: -10.0, x_max: 10.0, deadzone: 1e-4, n_x: 2001 }
    }
}

impl SamplingBox {
    pub fn new(x_min: f64, x_max: f64, deadzone: f64, n_x: usize) -> Result<Self, EnvelopeError> {
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(EnvelopeError::InvalidBox(format!(
                "need x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if !(deadzone > 0.0) {
            return Err(EnvelopeError::InvalidBox(format!(
                "deadzone must be positive, got {deadzone}"
            )));
        }
        if n_x < 2 {
            return Err(EnvelopeError::InvalidBox(format!("n_x must be >= 2, got {n_x}")));
        }
        let b = Self { x_min, x_max, deadzone, n_x };
        if b.samples().len() < 2 {
            return Err(EnvelopeError::InvalidBox(
                "deadzone removes all but one sample point".into(),
            ));
        }
        Ok(b)
    }

    /// Uniform samples over [x_min, x_max] with the deadzone removed.
    pub fn samples(&self) -> Vec<f64> {
        let step = (self.x_max - self.x_min) / (self.n_x - 1) as f64;
        (0..self.n_x)
            .map(|i| self.x_min + i as f64 * step)
            .filter(|x| x.abs() >= self.deadzone)
            .collect()
    }
}

/// Golden-section minimum of f on [a, b] down to REFINE_TOL in t.
/// Endpoint values are folded in so boundary minima come out exact.
fn golden_min<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a, b);
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > REFINE_TOL {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    fc.min(fd)
}

/// Refined minimum of f over one grid cell: an interior scan brackets the
/// best point, golden-section polishes it, endpoints always participate.
fn refine_cell_min<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let mut best = f(a).min(f(b));
    let step = (b - a) / (CELL_SCAN_POINTS + 1) as f64;
    let mut best_x = a;
    let mut best_interior = f64::INFINITY;
    for i in 1..=CELL_SCAN_POINTS {
        let x = a + step * i as f64;
        let v = f(x);
        if v < best_interior {
            best_interior = v;
            best_x = x;
        }
    }
    best = best.min(best_interior);
    let lo = (best_x - step).max(a);
    let hi = (best_x + step).min(b);
    best.min(golden_min(f, lo, hi))
}

/// Per-cell refined running minimum of f along the grid.
fn running_min_refined<F: Fn(f64) -> f64>(f: &F, times: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut run = f(times[0]);
    out.push(run);
    for w in times.windows(2) {
        let cell = refine_cell_min(f, w[0], w[1]);
        if cell < run {
            run = cell;
        }
        out.push(run);
    }
    out
}

fn validate_grid(times: &[f64]) -> Result<(), EnvelopeError> {
    if times.len() < 2 || times[0] != 0.0 {
        return Err(EnvelopeError::BadGrid);
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EnvelopeError::BadGrid);
    }
    Ok(())
}

/// Running supremum L*(t) of a Lipschitz bound: upper[n] = max L over
/// [0, t_n] with per-cell refinement, lower[n] = -upper[n].
pub fn running_sup_lipschitz<F: Fn(f64) -> f64>(
    lipschitz: F,
    times: &[f64],
) -> Result<CoeffEnvelope, EnvelopeError> {
    validate_grid(times)?;
    // Minimize -L; the chain on -L is reused bitwise as the lower part.
    let neg = running_min_refined(&|t| -lipschitz(t), times);
    // Reject negative L wherever the construction actually sampled it.
    let min_l = running_min_refined(&|t| lipschitz(t), times);
    for (i, &m) in min_l.iter().enumerate() {
        if m < 0.0 {
            return Err(EnvelopeError::NegativeLipschitz { t: times[i], value: m });
        }
    }
    let upper: Vec<f64> = neg.iter().map(|&v| -v).collect();
    Ok(CoeffEnvelope {
        times: times.to_vec(),
        lower: neg,
        upper,
        kind: EnvelopeKind::LipschitzOnly,
    })
}

/// Running min/max envelope of a linear coefficient a(t).
pub fn linear_coeff_envelope<F: Fn(f64) -> f64>(
    coeff: F,
    times: &[f64],
) -> Result<CoeffEnvelope, EnvelopeError> {
    validate_grid(times)?;
    let lower = running_min_refined(&|t| coeff(t), times);
    let upper: Vec<f64> = running_min_refined(&|t| -coeff(t), times)
        .iter()
        .map(|&v| -v)
        .collect();
    Ok(CoeffEnvelope {
        times: times.to_vec(),
        lower,
        upper,
        kind: EnvelopeKind::Linear,
    })
}

/// Scan of the quotient q(t, x) over the box samples at fixed t.
/// Returns (min, argmin x, max, argmax x).
fn scan_x<Q: Fn(f64, f64) -> f64>(q: &Q, t: f64, xs: &[f64]) -> (f64, f64, f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut xmin = xs[0];
    let mut xmax = xs[0];
    for &x in xs {
        let v = q(t, x);
        if v < min {
            min = v;
            xmin = x;
        }
        if v > max {
            max = v;
            xmax = x;
        }
    }
    (min, xmin, max, xmax)
}

/// Sampled running inf/sup of f(s,x)/x over [0, t_n] x box.
///
/// The result is an inner estimate: the sampled inf is >= the true inf and
/// the sampled sup <= the true sup. In t the extremum is refined per cell
/// (at the currently extremal x), so linear right-hand sides reproduce
/// [`linear_coeff_envelope`] to rounding accuracy.
pub fn nonlinear_coeff_envelope<F: Fn(f64, f64) -> f64>(
    rhs: F,
    times: &[f64],
    boxx: &SamplingBox,
) -> Result<CoeffEnvelope, EnvelopeError> {
    validate_grid(times)?;
    for &t in times {
        let v = rhs(t, 0.0);
        if v.abs() > VANISH_TOL {
            return Err(EnvelopeError::NonvanishingAtZero { t, value: v });
        }
    }
    let xs = boxx.samples();
    if xs.len() < 2 {
        return Err(EnvelopeError::InvalidBox("fewer than two usable samples".into()));
    }
    let q = |t: f64, x: f64| rhs(t, x) / x;

    let (m0, mut xlo_prev, big0, mut xhi_prev) = scan_x(&q, times[0], &xs);
    let mut run_lo = m0;
    let mut run_hi = big0;
    let mut lower = Vec::with_capacity(times.len());
    let mut upper = Vec::with_capacity(times.len());
    lower.push(run_lo);
    upper.push(run_hi);

    for w in times.windows(2) {
        let (m1, xlo_now, big1, xhi_now) = scan_x(&q, w[1], &xs);
        // Refine in s at the extremal x of either cell endpoint.
        let mut cell_min = refine_cell_min(&|s| q(s, xlo_prev), w[0], w[1]).min(m1);
        if xlo_now != xlo_prev {
            cell_min = cell_min.min(refine_cell_min(&|s| q(s, xlo_now), w[0], w[1]));
        }
        let mut cell_max = (-refine_cell_min(&|s| -q(s, xhi_prev), w[0], w[1])).max(big1);
        if xhi_now != xhi_prev {
            cell_max = cell_max.max(-refine_cell_min(&|s| -q(s, xhi_now), w[0], w[1]));
        }

        if cell_min < run_lo {
            run_lo = cell_min;
        }
        if cell_max > run_hi {
            run_hi = cell_max;
        }
        lower.push(run_lo);
        upper.push(run_hi);
        xlo_prev = xlo_now;
        xhi_prev = xhi_now;
    }
    Ok(CoeffEnvelope {
        times: times.to_vec(),
        lower,
        upper,
        kind: EnvelopeKind::NonlinearSampled,
    })
}

/// Running inf/sup of the shifted quotient
/// (f(s, x + x1(s)) - f(s, x1(s))) / x around a reference trajectory,
/// sampled at the trajectory's own grid times.
pub fn shifted_coeff_envelope<F: Fn(f64, f64) -> f64>(
    rhs: F,
    reference: &Trajectory,
    boxx: &SamplingBox,
) -> Result<CoeffEnvelope, EnvelopeError> {
    let times = &reference.times;
    validate_grid(times)?;
    let xs = boxx.samples();
    if xs.len() < 2 {
        return Err(EnvelopeError::InvalidBox("fewer than two usable samples".into()));
    }
    let mut lower = Vec::with_capacity(times.len());
    let mut upper = Vec::with_capacity(times.len());
    let mut run_lo = f64::INFINITY;
    let mut run_hi = f64::NEG_INFINITY;
    for (n, &t) in times.iter().enumerate() {
        let x1 = reference.values[n];
        let fx1 = rhs(t, x1);
        for &x in &xs {
            let v = (rhs(t, x + x1) - fx1) / x;
            if v < run_lo {
                run_lo = v;
            }
            if v > run_hi {
                run_hi = v;
            }
        }
        lower.push(run_lo);
        upper.push(run_hi);
    }
    Ok(CoeffEnvelope {
        times: times.to_vec(),
        lower,
        upper,
        kind: EnvelopeKind::ShiftedSampled,
    })
}
