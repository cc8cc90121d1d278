//! Subcommand implementations writing CSV/JSON artifacts.

use std::io::Write;

use fracsep_core::bounds::{
    classic_bounds, general_separation_bounds, linear_bounds, nonlinear_zero_bounds,
    separation_bounds, BoundEnvelope, BoundsError,
};
use fracsep_core::envelope::{
    linear_coeff_envelope, nonlinear_coeff_envelope, running_sup_lipschitz,
    shifted_coeff_envelope, CoeffEnvelope, EnvelopeError,
};
use fracsep_core::shooting::{solve_tvp, ShootingError, TVProblem};
use fracsep_core::solver::{
    contraction_ratio, solve_pi_trapezoidal, uniform_times, FracIVP, SolverError, Trajectory,
};
use fracsep_core::special::{ml, ml2, SpecialError};

use crate::config::{ExperimentConfig, ProblemKind};
use crate::fmt::fmt17;

#[derive(Debug)]
pub enum CliError {
    /// Configuration or parameter problems: exit code 2.
    Invalid(String),
    /// Numerical failures at run time: exit code 3.
    Numeric(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<SpecialError> for CliError {
    fn from(e: SpecialError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<EnvelopeError> for CliError {
    fn from(e: EnvelopeError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InvalidProblem(_) | SolverError::NonUniformGrid(_) => {
                CliError::Invalid(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<ShootingError> for CliError {
    fn from(e: ShootingError) -> Self {
        match e {
            ShootingError::InvalidProblem(_) | ShootingError::ZeroResidual => {
                CliError::Invalid(e.to_string())
            }
            ShootingError::Solver(s) => s.into(),
            ShootingError::Special(s) => CliError::Invalid(s.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numeric(format!("i/o error: {e}"))
    }
}

pub fn cmd_ml(alpha: f64, beta: Option<f64>, z: f64, out: &mut dyn Write) -> Result<(), CliError> {
    let value = match beta {
        Some(b) => ml2(alpha, b, z)?,
        None => ml(alpha, z)?,
    };
    writeln!(out, "{}", fmt17(value))?;
    Ok(())
}

fn require_x0(cfg: &ExperimentConfig) -> Result<f64, CliError> {
    cfg.x0
        .ok_or_else(|| CliError::Invalid("missing required key 'x0'".into()))
}

fn ordered_pair(cfg: &ExperimentConfig) -> Result<(f64, f64), CliError> {
    let a = require_x0(cfg)?;
    let b = cfg
        .x0_b
        .ok_or_else(|| CliError::Invalid("missing required key 'x0_b'".into()))?;
    if a == b {
        return Err(CliError::Invalid("x0 and x0_b must differ".into()));
    }
    Ok(if a < b { (a, b) } else { (b, a) })
}

/// Warn on stderr when the implicit step map is not a contraction for the
/// configured coefficient.
fn warn_if_step_too_large(cfg: &ExperimentConfig, h: f64) {
    if cfg.kind != ProblemKind::LinearCoeff {
        return;
    }
    let Ok(a) = cfg.coefficient() else { return };
    let n = (cfg.t_end / h).ceil() as usize;
    let mut lip: f64 = 0.0;
    for i in 0..=n.min(100_000) {
        lip = lip.max(a(i as f64 * h).abs());
    }
    let ratio = contraction_ratio(cfg.alpha, h, lip);
    if ratio >= 1.0 {
        eprintln!(
            "warning: step size h = {h} may be too large: h^alpha * L / Gamma(alpha+2) = {ratio:.3}"
        );
    }
}

fn write_trajectory(tr: &Trajectory, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "t,x")?;
    for (t, x) in tr.times.iter().zip(&tr.values) {
        writeln!(out, "{},{}", fmt17(*t), fmt17(*x))?;
    }
    Ok(())
}

pub fn cmd_solve(cfg: &ExperimentConfig, h: f64, out: &mut dyn Write) -> Result<(), CliError> {
    warn_if_step_too_large(cfg, h);
    let rhs = cfg.right_hand_side()?;
    let x0 = require_x0(cfg)?;
    let ivp = FracIVP::new(cfg.alpha, |t, x| rhs(t, x), x0, cfg.t_end)?;
    let tr = solve_pi_trapezoidal(&ivp, h)?;
    write_trajectory(&tr, out)
}

/// The coefficient envelope the configured kind induces.
fn build_envelope(cfg: &ExperimentConfig, h: f64) -> Result<CoeffEnvelope, CliError> {
    let times = uniform_times(cfg.t_end, h)?;
    match cfg.kind {
        ProblemKind::LinearCoeff => {
            let a = cfg.coefficient()?;
            Ok(linear_coeff_envelope(|t| a(t), &times)?)
        }
        ProblemKind::Nonlinear => {
            let rhs = cfg.right_hand_side()?;
            Ok(nonlinear_coeff_envelope(|t, x| rhs(t, x), &times, &cfg.boxx)?)
        }
        ProblemKind::Shifted => {
            let rhs = cfg.right_hand_side()?;
            let x0 = require_x0(cfg)?;
            let ivp = FracIVP::new(cfg.alpha, |t, x| rhs(t, x), x0, cfg.t_end)?;
            let reference = solve_pi_trapezoidal(&ivp, h)?;
            Ok(shifted_coeff_envelope(|t, x| rhs(t, x), &reference, &cfg.boxx)?)
        }
    }
}

pub fn cmd_envelope(cfg: &ExperimentConfig, h: f64, out: &mut dyn Write) -> Result<(), CliError> {
    let env = build_envelope(cfg, h)?;
    writeln!(out, "t,a_lower,a_upper")?;
    for i in 0..env.len() {
        writeln!(
            out,
            "{},{},{}",
            fmt17(env.times[i]),
            fmt17(env.lower[i]),
            fmt17(env.upper[i])
        )?;
    }
    Ok(())
}

pub fn cmd_bounds(cfg: &ExperimentConfig, h: f64, out: &mut dyn Write) -> Result<(), CliError> {
    let env = build_envelope(cfg, h)?;
    let bounds: BoundEnvelope = match cfg.kind {
        ProblemKind::LinearCoeff => {
            let (x10, x20) = ordered_pair(cfg)?;
            linear_bounds(x20 - x10, cfg.alpha, &env)?
        }
        ProblemKind::Nonlinear => match cfg.x0_b {
            Some(_) => {
                let (x10, x20) = ordered_pair(cfg)?;
                separation_bounds(x10, x20, cfg.alpha, &env)?
            }
            None => nonlinear_zero_bounds(require_x0(cfg)?, cfg.alpha, &env)?,
        },
        ProblemKind::Shifted => {
            let (x10, x20) = ordered_pair(cfg)?;
            // The envelope reference must start from the smaller value.
            if require_x0(cfg)? != x10 {
                return Err(CliError::Invalid(
                    "for shifted bounds, x0 must be the smaller initial value".into(),
                ));
            }
            general_separation_bounds(x10, x20, cfg.alpha, &env)?
        }
    };
    writeln!(out, "t,lower,upper")?;
    for i in 0..bounds.len() {
        writeln!(
            out,
            "{},{},{}",
            fmt17(bounds.times[i]),
            fmt17(bounds.lower[i]),
            fmt17(bounds.upper[i])
        )?;
    }
    Ok(())
}

fn downsample(tr: &Trajectory, step: usize, h: f64) -> Trajectory {
    Trajectory {
        h,
        times: tr.times.iter().copied().step_by(step).collect(),
        values: tr.values.iter().copied().step_by(step).collect(),
    }
}

pub fn cmd_compare(cfg: &ExperimentConfig, h: f64, out: &mut dyn Write) -> Result<(), CliError> {
    warn_if_step_too_large(cfg, h);
    let (x10, x20) = ordered_pair(cfg)?;
    let dx0 = x20 - x10;
    let rhs = cfg.right_hand_side()?;

    // Separation is measured with a finer internal step and sampled onto
    // the report grid; at the report step itself the solver's startup error
    // near t = 0 would mask the true margins.
    let refine = cfg.measure_refine;
    let fine_h = h / refine as f64;
    let ivp1 = FracIVP::new(cfg.alpha, |t, x| rhs(t, x), x10, cfg.t_end)?;
    let ivp2 = FracIVP::new(cfg.alpha, |t, x| rhs(t, x), x20, cfg.t_end)?;
    let x1 = downsample(&solve_pi_trapezoidal(&ivp1, fine_h)?, refine, h);
    let x2 = downsample(&solve_pi_trapezoidal(&ivp2, fine_h)?, refine, h);

    let (classic, tighter) = match cfg.kind {
        ProblemKind::LinearCoeff => {
            let a = cfg.coefficient()?;
            let lin = linear_coeff_envelope(|t| a(t), &x1.times)?;
            let lip = running_sup_lipschitz(|t| a(t).abs(), &x1.times)?;
            (
                classic_bounds(dx0, cfg.alpha, &lip)?,
                linear_bounds(dx0, cfg.alpha, &lin)?,
            )
        }
        ProblemKind::Shifted => {
            let env = shifted_coeff_envelope(|t, x| rhs(t, x), &x1, &cfg.boxx)?;
            let lip = env.to_lipschitz();
            (
                classic_bounds(dx0, cfg.alpha, &lip)?,
                general_separation_bounds(x10, x20, cfg.alpha, &env)?,
            )
        }
        ProblemKind::Nonlinear => {
            return Err(CliError::Invalid(
                "compare supports the linear-coeff and shifted kinds".into(),
            ))
        }
    };

    writeln!(out, "t,separation,lower_classic,upper_classic,lower_new,upper_new")?;
    for i in 0..x1.len() {
        let sep = (x2.values[i] - x1.values[i]).abs();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt17(x1.times[i]),
            fmt17(sep),
            fmt17(classic.lower[i]),
            fmt17(classic.upper[i]),
            fmt17(tighter.lower[i]),
            fmt17(tighter.upper[i])
        )?;
    }
    Ok(())
}

pub fn cmd_shoot(cfg: &ExperimentConfig, h: f64, out: &mut dyn Write) -> Result<(), CliError> {
    let x_target = cfg
        .x_target
        .ok_or_else(|| CliError::Invalid("missing required key 'x_target'".into()))?;
    let tol = cfg
        .tol
        .ok_or_else(|| CliError::Invalid("missing required key 'tol'".into()))?;
    let max_iter = cfg
        .max_iter
        .ok_or_else(|| CliError::Invalid("missing required key 'max_iter'".into()))?;
    let rhs = cfg.right_hand_side()?;
    let problem = TVProblem::new(cfg.alpha, |t, x| rhs(t, x), cfg.t_end, x_target, tol, max_iter)?;
    let env = match cfg.kind {
        ProblemKind::LinearCoeff => Some(build_envelope(cfg, h)?),
        _ => None,
    };
    let report = solve_tvp(&problem, h, env.as_ref())?;

    let brackets: Vec<String> = report
        .bracket_history
        .iter()
        .map(|(lo, hi)| format!("[{},{}]", fmt17(*lo), fmt17(*hi)))
        .collect();
    writeln!(
        out,
        "{{\"x0\": {}, \"terminal\": {}, \"iterations\": {}, \"brackets\": [{}]}}",
        fmt17(report.x0_found),
        fmt17(report.terminal_achieved),
        report.iterations,
        brackets.join(",")
    )?;
    Ok(())
}
