//! Command-line front end: evaluates Mittag-Leffler functions, solves
//! Caputo initial value problems, and emits envelope/bound/comparison data
//! as CSV plus shooting reports as JSON.

mod commands;
mod config;
mod expr;
mod fmt;

use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CliError;
use config::ExperimentConfig;

#[derive(Parser)]
#[command(
    name = "fracsep",
    about = "Separation bounds for scalar Caputo fractional differential equations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the grid step from the config
    #[arg(long, allow_negative_numbers = true)]
    h: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the Mittag-Leffler function E_alpha(z) or E_{alpha,beta}(z)
    Ml {
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        z: f64,
    },
    /// Solve the configured initial value problem; CSV `t,x`
    Solve(RunArgs),
    /// Emit the running coefficient envelope; CSV `t,a_lower,a_upper`
    Envelope(RunArgs),
    /// Emit separation (or solution) bounds; CSV `t,lower,upper`
    Bounds(RunArgs),
    /// Measured separation against classic and envelope bounds; CSV
    Compare(RunArgs),
    /// Solve a terminal value problem by bound-guided shooting; JSON report
    Shoot(RunArgs),
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(std::fs::File::create(p).map_err(|e| {
            CliError::Invalid(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

fn run_config_command(
    args: &RunArgs,
    run: impl FnOnce(&ExperimentConfig, f64, &mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let cfg = ExperimentConfig::from_path(&args.config)?;
    let h = match args.h {
        Some(h) if h > 0.0 => h,
        Some(h) => return Err(CliError::Invalid(format!("--h must be positive, got {h}"))),
        None => cfg.h,
    };
    let mut out = open_out(&args.out)?;
    run(&cfg, h, out.as_mut())?;
    out.flush()?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ml { alpha, beta, z } => {
            let mut out = open_out(&None)?;
            commands::cmd_ml(alpha, beta, z, out.as_mut())?;
            out.flush()?;
            Ok(())
        }
        Command::Solve(args) => run_config_command(&args, commands::cmd_solve),
        Command::Envelope(args) => run_config_command(&args, commands::cmd_envelope),
        Command::Bounds(args) => run_config_command(&args, commands::cmd_bounds),
        Command::Compare(args) => run_config_command(&args, commands::cmd_compare),
        Command::Shoot(args) => run_config_command(&args, commands::cmd_shoot),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
