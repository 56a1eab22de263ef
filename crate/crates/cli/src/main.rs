//! `fbmx`: bound sweeps, Monte Carlo estimates, validation runs and plot-ready
//! tables for the expected maximum of fractional Brownian motion.
//!
//! Exit status: 0 on success, 1 when `validate` finds a failing criterion,
//! 2 for invalid flags or config, 3 for runtime failures (I/O, numerics).

mod bounds_cmd;
mod config;
mod emit;
mod estimate_cmd;
mod report_cmd;
mod validate_cmd;
mod validity_cmd;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{FileConfig, GlobalArgs};

#[derive(Debug, Parser)]
#[command(name = "fbmx", version, about = "Expected maxima of fractional Brownian motion: bounds, estimates, validation")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate bounds over a grid of (h, n, alpha).
    Bounds(bounds_cmd::BoundsArgs),
    /// Ranges of n on which the gap bounds hold, and the critical alpha.
    Validity(validity_cmd::ValidityArgs),
    /// Monte Carlo estimates of grid maxima and related quantities.
    Estimate(estimate_cmd::EstimateArgs),
    /// Run the acceptance criteria.
    Validate(validate_cmd::ValidateArgs),
    /// Tidy CSV series for plotting.
    Report(report_cmd::ReportArgs),
}

#[derive(Debug)]
pub enum CliError {
    /// Invalid flags, config file or parameter values.
    Usage(String),
    /// Failure after validation succeeded.
    Runtime(String),
    /// `validate` ran and at least one criterion failed.
    CriteriaFailed(Vec<u32>),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::CriteriaFailed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "invalid configuration: {m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
            CliError::CriteriaFailed(ids) => write!(f, "failed criteria: {ids:?}"),
        }
    }
}

impl From<fbm_extremes::FbmError> for CliError {
    fn from(e: fbm_extremes::FbmError) -> Self {
        use fbm_extremes::FbmError::*;
        match e {
            InvalidHurst(_) | EmptyGrid | GridTooLarge { .. } | Precondition(_) | DimensionMismatch(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.global.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let global = cli.global.merge(&file);
    global.install_thread_pool()?;
    match cli.command {
        Command::Bounds(a) => bounds_cmd::run(&global, a.merge(file.bounds)),
        Command::Validity(a) => validity_cmd::run(&global, a.merge(file.validity)),
        Command::Estimate(a) => estimate_cmd::run(&global, a.merge(file.estimate)),
        Command::Validate(a) => validate_cmd::run(&global, a.merge(file.validate)),
        Command::Report(a) => report_cmd::run(&global, a.merge(file.report)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fbmx: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
