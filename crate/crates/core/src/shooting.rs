//! Shooting method for terminal value problems.
//!
//! A terminal value problem prescribes x(T) instead of x(0). Since the
//! terminal value is strictly increasing in the initial value, bisection on
//! the initial guess converges unconditionally; when a coefficient envelope
//! is available, inverting the separation bounds yields a bracket for the
//! initial shift directly, which collapses to a single point (and a
//! one-shot solve) for constant-coefficient linear problems.

use crate::envelope::CoeffEnvelope;
use crate::solver::{solve_pi_trapezoidal, FracIVP, SolverError};
use crate::special::{ml, SpecialError};
use thiserror::Error;

/// Bracket radius saturation when the slow-growth bound degenerates.
const BRACKET_CAP: f64 = 1e18;

/// Doubling attempts while searching for a sign change.
const MAX_EXPANSIONS: usize = 60;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShootingError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("terminal residual still {residual:e} after {iterations} iterations")]
    MaxIterExceeded { iterations: usize, residual: f64 },
    #[error("no sign change found after {0} bracket doublings")]
    BracketExpansionFailed(usize),
    #[error("residual must be nonzero")]
    ZeroResidual,
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// A terminal value problem: D^alpha x = f(t,x) on [0, t_end] with
/// x(t_end) = x_target, solved to |x(t_end) - x_target| <= tol.
pub struct TVProblem<F: Fn(f64, f64) -> f64> {
    pub alpha: f64,
    pub rhs: F,
    pub t_end: f64,
    pub x_target: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl<F: Fn(f64, f64) -> f64> TVProblem<F> {
    pub fn new(
        alpha: f64,
        rhs: F,
        t_end: f64,
        x_target: f64,
        tol: f64,
        max_iter: usize,
    ) -> Result<Self, ShootingError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(ShootingError::InvalidProblem(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(ShootingError::InvalidProblem(format!(
                "t_end must be positive, got {t_end}"
            )));
        }
        if !x_target.is_finite() {
            return Err(ShootingError::InvalidProblem("x_target must be finite".into()));
        }
        if !(tol > 0.0) {
            return Err(ShootingError::InvalidProblem(format!(
                "tol must be positive, got {tol}"
            )));
        }
        if max_iter == 0 {
            return Err(ShootingError::InvalidProblem("max_iter must be >= 1".into()));
        }
        Ok(Self { alpha, rhs, t_end, x_target, tol, max_iter })
    }
}

/// Outcome of a shooting run.
#[derive(Debug, Clone, PartialEq)]
pub struct ShootingReport {
    pub x0_found: f64,
    pub terminal_achieved: f64,
    /// Number of initial value problems solved.
    pub iterations: usize,
    /// Bisection brackets, widths strictly decreasing.
    pub bracket_history: Vec<(f64, f64)>,
}

/// Terminal value x(t_end) of the initial value problem started at x0.
pub fn terminal_map<F: Fn(f64, f64) -> f64>(
    alpha: f64,
    rhs: &F,
    t_end: f64,
    x0: f64,
    h: f64,
) -> Result<f64, ShootingError> {
    let ivp = FracIVP::new(alpha, |t, x| rhs(t, x), x0, t_end)?;
    Ok(solve_pi_trapezoidal(&ivp, h)?.last())
}

/// Initial-shift interval implied by inverting the separation bounds.
///
/// A terminal residual r is produced by an initial shift between
/// r / E_alpha(a_up T^alpha) (fast growth) and r / E_alpha(a_low T^alpha)
/// (slow growth). Returned ascending; the fast-growth end saturates to 0
/// when its Mittag-Leffler factor is infinite, the slow-growth end to a
/// cap when its factor underflows to zero.
pub fn bound_guided_bracket(
    residual: f64,
    alpha: f64,
    coeff_at_end: (f64, f64),
    t_end: f64,
) -> Result<(f64, f64), ShootingError> {
    let (a_low, a_up) = coeff_at_end;
    if residual == 0.0 {
        return Err(ShootingError::ZeroResidual);
    }
    if !(a_low <= a_up) {
        return Err(ShootingError::InvalidProblem(format!(
            "need a_low <= a_up, got ({a_low}, {a_up})"
        )));
    }
    let ta = t_end.powf(alpha);
    let e_up = ml(alpha, a_up * ta)?;
    let e_low = ml(alpha, a_low * ta)?;
    let near = if e_up.is_infinite() { 0.0 } else { residual / e_up };
    let far = if e_low == 0.0 {
        residual.signum() * BRACKET_CAP
    } else {
        residual / e_low
    };
    Ok(if near <= far { (near, far) } else { (far, near) })
}

/// Shooting iteration for a terminal value problem.
///
/// With an envelope the first bracket comes from [`bound_guided_bracket`];
/// otherwise the bracket is found by doubling a radius around the target.
/// Bisection then exploits the strict monotonicity of the terminal map.
/// `iterations` counts initial value problem solves.
pub fn solve_tvp<F: Fn(f64, f64) -> f64>(
    problem: &TVProblem<F>,
    h: f64,
    coeff_env: Option<&CoeffEnvelope>,
) -> Result<ShootingReport, ShootingError> {
    let target = problem.x_target;
    let mut iterations = 0usize;
    let mut history: Vec<(f64, f64)> = Vec::new();

    let eval = |x0: f64, iterations: &mut usize| -> Result<f64, ShootingError> {
        *iterations += 1;
        terminal_map(problem.alpha, &problem.rhs, problem.t_end, x0, h)
    };

    // First guess: the terminal value itself.
    let guess = target;
    let first_terminal = eval(guess, &mut iterations)?;
    let first_residual = target - first_terminal;
    if first_residual.abs() <= problem.tol {
        return Ok(ShootingReport {
            x0_found: guess,
            terminal_achieved: first_terminal,
            iterations,
            bracket_history: history,
        });
    }

    let (mut lo, mut hi);
    match coeff_env {
        Some(env) => {
            let residual = first_residual;
            let coeff_at_end = (*env.lower.last().unwrap(), *env.upper.last().unwrap());
            let (d_min, d_max) =
                bound_guided_bracket(residual, problem.alpha, coeff_at_end, problem.t_end)?;
            lo = guess + d_min;
            hi = guess + d_max;
            // Guard against solver noise pushing the root just outside the
            // analytic bracket.
            let pad = 1e-9 * (1.0 + hi.abs().max(lo.abs()));
            lo -= pad;
            hi += pad;
        }
        None => {
            let mut radius = target.abs().max(1.0);
            let mut expansions = 0;
            loop {
                // The terminal map is increasing in x0, so only the side the
                // first residual points at needs probing each round.
                let cand_lo = guess - radius;
                let cand_hi = guess + radius;
                let f_lo = eval(cand_lo, &mut iterations)? - target;
                let f_hi = eval(cand_hi, &mut iterations)? - target;
                if f_lo <= 0.0 && f_hi >= 0.0 {
                    lo = cand_lo;
                    hi = cand_hi;
                    break;
                }
                expansions += 1;
                if expansions > MAX_EXPANSIONS {
                    return Err(ShootingError::BracketExpansionFailed(expansions - 1));
                }
                radius *= 2.0;
            }
        }
    }

    history.push((lo, hi));
    let mut best = (f64::NAN, f64::INFINITY);
    while iterations < problem.max_iter {
        let mid = 0.5 * (lo + hi);
        let terminal = eval(mid, &mut iterations)?;
        let residual = target - terminal;
        if residual.abs() < best.1 {
            best = (mid, residual.abs());
        }
        if residual.abs() <= problem.tol {
            return Ok(ShootingReport {
                x0_found: mid,
                terminal_achieved: terminal,
                iterations,
                bracket_history: history,
            });
        }
        if terminal < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < f64::EPSILON * (1.0 + lo.abs().max(hi.abs())) {
            // Bracket exhausted f64 resolution without meeting tol.
            return Err(ShootingError::MaxIterExceeded {
                iterations,
                residual: best.1,
            });
        }
        history.push((lo, hi));
    }
    Err(ShootingError::MaxIterExceeded {
        iterations,
        residual: best.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envelope::linear_coeff_envelope;
    use crate::solver::uniform_times;

    #[test]
    fn terminal_map_trivial() {
        let got = terminal_map(0.65, &|_t, _x| 0.0, 2.0, 7.0, 0.1).unwrap();
        assert_eq!(got, 7.0);
    }

    #[test]
    fn terminal_map_linear_decay() {
        let got = terminal_map(0.65, &|_t, x: f64| -x, 1.0, 1.0, 1e-3).unwrap();
        let want = ml(0.65, -1.0).unwrap();
        assert!((got - want).abs() < 1e-3, "terminal {got} vs {want}");
    }

    #[test]
    fn terminal_map_monotone() {
        let rhs = |t: f64, x: f64| -0.7 * x + 0.2 * (x + t).sin();
        let a = terminal_map(0.65, &rhs, 1.0, 1.0, 2e-3).unwrap();
        let b = terminal_map(0.65, &rhs, 1.0, 2.0, 2e-3).unwrap();
        assert!(a < b);
    }

    #[test]
    fn bracket_constant_coefficient_is_one_shot() {
        let (lo, hi) = bound_guided_bracket(0.5, 0.65, (-1.0, -1.0), 1.0).unwrap();
        assert_eq!(lo, hi);
        let want = 0.5 / ml(0.65, -1.0).unwrap();
        assert!((lo - want).abs() < 1e-14);
    }

    #[test]
    fn bracket_orders_by_sign() {
        let pos = bound_guided_bracket(0.1, 0.65, (-2.0, -0.5), 2.0).unwrap();
        assert!(pos.0 <= pos.1 && pos.0 > 0.0);
        let neg = bound_guided_bracket(-0.1, 0.65, (-2.0, -0.5), 2.0).unwrap();
        assert!(neg.0 <= neg.1 && neg.1 < 0.0);
        assert!(bound_guided_bracket(0.0, 0.65, (-1.0, 1.0), 1.0).is_err());
    }

    #[test]
    fn bracket_saturates_on_overflowing_growth() {
        // a_up large positive: E goes infinite, fast end pins to 0.
        let (lo, hi) = bound_guided_bracket(1.0, 0.5, (0.0, 1000.0), 5.0).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 1.0).abs() < 1e-12); // E(0) = 1
    }

    #[test]
    fn zero_rhs_round_trip() {
        let p = TVProblem::new(0.65, |_t, _x| 0.0, 1.0, 3.0, 1e-9, 10).unwrap();
        let rep = solve_tvp(&p, 0.05, None).unwrap();
        assert!((rep.x0_found - 3.0).abs() <= 1e-9);
        assert!(rep.iterations <= 2);
    }

    #[test]
    fn linear_decay_round_trip_without_envelope() {
        let target = ml(0.65, -1.0).unwrap();
        let p = TVProblem::new(0.65, |_t, x: f64| -x, 1.0, target, 1e-6, 80).unwrap();
        let rep = solve_tvp(&p, 2.5e-4, None).unwrap();
        assert!(
            (rep.x0_found - 1.0).abs() < 1e-4,
            "recovered x0 = {}",
            rep.x0_found
        );
        // Bracket widths shrink by at least a factor of two per step.
        for w in rep.bracket_history.windows(2) {
            assert!(w[1].1 - w[1].0 <= 0.5 * (w[0].1 - w[0].0) * (1.0 + 1e-12));
        }
        // Recorded brackets always contain the answer.
        for &(lo, hi) in &rep.bracket_history {
            assert!(lo <= rep.x0_found && rep.x0_found <= hi);
        }
    }

    #[test]
    fn constant_coefficient_with_envelope_is_two_iterations() {
        let times = uniform_times(1.0, 1e-3).unwrap();
        let env = linear_coeff_envelope(|_| -1.0, &times).unwrap();
        let target = ml(0.65, -1.0).unwrap();
        let p = TVProblem::new(0.65, |_t, x: f64| -x, 1.0, target, 1e-4, 60).unwrap();
        let rep = solve_tvp(&p, 1e-3, Some(&env)).unwrap();
        assert!(rep.iterations <= 2, "took {} iterations", rep.iterations);
        assert!((rep.x0_found - 1.0).abs() < 1e-3);
    }

    #[test]
    fn paper_problem_round_trip() {
        // Target measured from the x0 = 1 run; the shooting must hand back
        // exactly that initial value, and every recorded bracket contains it.
        let a = |t: f64| -0.5 * (1.0 + 4.0 * t + 3.0 * (4.0 * t).cos());
        let rhs = move |t: f64, x: f64| a(t) * x;
        let h = 2e-3;
        let target = terminal_map(0.65, &rhs, 6.0, 1.0, h).unwrap();
        let p = TVProblem::new(0.65, rhs, 6.0, target, 1e-9, 80).unwrap();
        let rep = solve_tvp(&p, h, None).unwrap();
        assert!((rep.x0_found - 1.0).abs() <= 1e-5, "x0 = {}", rep.x0_found);
        for &(lo, hi) in &rep.bracket_history {
            assert!(lo <= 1.0 && 1.0 <= hi, "bracket [{lo}, {hi}] lost the root");
        }
    }

    #[test]
    fn bracket_from_paper_envelope() {
        // Inverting the bounds with the worked example's envelope at T = 6.
        let times = uniform_times(6.0, 1e-3).unwrap();
        let a = |t: f64| -0.5 * (1.0 + 4.0 * t + 3.0 * (4.0 * t).cos());
        let env = linear_coeff_envelope(a, &times).unwrap();
        let (a_low, a_up) = (*env.lower.last().unwrap(), *env.upper.last().unwrap());
        let (lo, hi) = bound_guided_bracket(0.1, 0.65, (a_low, a_up), 6.0).unwrap();
        let ta = 6.0f64.powf(0.65);
        let want_lo = 0.1 / ml(0.65, a_up * ta).unwrap();
        let want_hi = 0.1 / ml(0.65, a_low * ta).unwrap();
        assert_eq!(lo, want_lo);
        assert_eq!(hi, want_hi);
        assert!(lo > 0.0 && lo < hi && hi.is_finite());
    }

    #[test]
    fn max_iter_reported() {
        let p = TVProblem::new(0.65, |_t, x: f64| -x, 1.0, 0.5, 1e-15, 4).unwrap();
        match solve_tvp(&p, 0.01, None) {
            Err(ShootingError::MaxIterExceeded { iterations, .. }) => {
                assert_eq!(iterations, 4);
            }
            other => panic!("expected MaxIterExceeded, got {other:?}"),
        }
    }

    #[test]
    fn problem_validation() {
        assert!(TVProblem::new(0.65, |_t, x: f64| x, 1.0, 0.0, 0.0, 5).is_err());
        assert!(TVProblem::new(0.65, |_t, x: f64| x, 1.0, 0.0, 1e-6, 0).is_err());
        assert!(TVProblem::new(1.5, |_t, x: f64| x, 1.0, 0.0, 1e-6, 5).is_err());
        assert!(TVProblem::new(0.65, |_t, x: f64| x, -1.0, 0.0, 1e-6, 5).is_err());
    }
}
