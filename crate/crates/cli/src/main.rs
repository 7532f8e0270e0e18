//! `covadmm`: sparse positive-definite covariance estimation from the
//! command line.

mod commands;
mod error;
mod io;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use covadmm::selection::Scale;
use covadmm::SolverConfig;

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "covadmm", version, about = "Positive-definite sparse covariance estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate a covariance matrix from observations.
    Estimate(EstimateArgs),
    /// Compute estimates along a grid of penalty values.
    Path(PathArgs),
    /// Run the Monte Carlo comparison on a simulated model.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleArg {
    Cov,
    Corr,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Cov => Scale::Covariance,
            ScaleArg::Corr => Scale::Correlation,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SolverArgs {
    /// Eigenvalue floor of the estimate.
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    #[arg(long, default_value_t = 2.0)]
    pub mu: f64,
    /// Primal and dual residual tolerance (relative to ‖S‖_F).
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 20_000)]
    pub max_iter: usize,
}

impl SolverArgs {
    pub fn config(&self, lambda: f64) -> SolverConfig {
        SolverConfig {
            lambda,
            eps: self.eps,
            mu: self.mu,
            tol_primal: self.tol,
            tol_dual: self.tol,
            max_iter: self.max_iter,
            track_iterates: false,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ScaleArgs {
    /// Fit to the sample covariance or the sample correlation.
    #[arg(long, value_enum, default_value_t = ScaleArg::Corr)]
    pub scale: ScaleArg,
    /// Standardize columns before computing a covariance-scale matrix.
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    pub standardize: bool,
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("penalty").required(true).args(["lambda", "cv"]))]
pub struct EstimateArgs {
    /// CSV of observations (rows) by variables (columns).
    #[arg(long)]
    pub input: PathBuf,
    /// Penalty weight.
    #[arg(long, conflicts_with = "cv")]
    pub lambda: Option<f64>,
    /// Choose the penalty by cross-validation.
    #[arg(long)]
    pub cv: bool,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// CV grid as start:step:end.
    #[arg(long, default_value = "0.01:0.01:0.99")]
    pub grid: String,
    /// Seed of the fold assignment.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub scale: ScaleArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Prefix of the output files.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["input", "covariance"]))]
pub struct PathArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// CSV of a symmetric p×p matrix used as is.
    #[arg(long)]
    pub covariance: Option<PathBuf>,
    #[arg(long, default_value = "0.01:0.01:0.99")]
    pub grid: String,
    #[command(flatten)]
    pub scale: ScaleArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// 1: banded, 2: linked blocks (p a multiple of 20).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub model: u8,
    #[arg(long, default_value_t = 100)]
    pub p: usize,
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value = "0.01:0.01:0.99")]
    pub grid: String,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub output: PathBuf,
}

/// Caps the global pool at `COVADMM_THREADS` workers (0 or unset: one per
/// core).
fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("COVADMM_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("COVADMM_THREADS must be a non-negative integer, got {raw:?}")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {threads} worker threads: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<bool> {
    configure_threads()?;
    let argv: Vec<String> = std::env::args().collect();
    match cli.command {
        Command::Estimate(args) => commands::estimate(args, argv),
        Command::Path(args) => commands::path(args, argv),
        Command::Simulate(args) => commands::simulate(args, argv),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("warning: solver did not converge within the iteration limit");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
