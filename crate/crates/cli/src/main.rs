//! Command-line front end: builds solutions from a JSON config, runs
//! verification suites and writes reports and plot data.
//!
//! Exit codes: 0 pass, 1 a check failed, 2 configuration error, 3 numeric failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use output::Sink;

/// Environment variable capping the worker pool of randomized suites.
const THREADS_VAR: &str = "SOLITON_FORGE_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("output error: {0}")]
    Io(String),
    #[error("numeric failure: {0}")]
    Numeric(soliton_forge::Error),
}

impl From<soliton_forge::Error> for CliError {
    fn from(e: soliton_forge::Error) -> Self {
        use soliton_forge::Error as E;
        match e {
            E::SizeMismatch { .. }
            | E::NTooLarge(_)
            | E::InvalidSpectrum(_)
            | E::InvalidParams(_)
            | E::IndexOutOfRange { .. }
            | E::OrderOutOfRange { .. }
            | E::CaseMismatch
            | E::RequiresThreeComponents(_)
            | E::ZeroRatio
            | E::ZeroParameter(_)
            | E::InvalidGrid(_) => CliError::Config(e.to_string()),
            other => CliError::Numeric(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "soliton-forge", version, about = "Exact multi-soliton solutions of the cubic NLS system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of grid points (odd).
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    /// Grid half-width.
    #[arg(long, global = true)]
    half_width: Option<f64>,
    /// Tolerance applied to every check.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Machine-readable JSON on stdout only.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the profile (x, u, u', V) on the grid and a JSON header.
    Build,
    /// Run the residual, identity, mass and energy checks.
    Verify,
    /// Estimate the kernel of the linearized operator.
    Kernel,
    /// Trace the solution branches for a value ratio q, optionally counting preimages of p.
    Branches,
    /// Classify the spectrum for solutions with unit masses.
    Normalized,
    /// Run the checks on randomly drawn instances.
    Sweep,
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("{THREADS_VAR} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if cli.grid_points.is_some() {
        cfg.grid.points = cli.grid_points;
    }
    if cli.half_width.is_some() {
        cfg.grid.half_width = cli.half_width;
    }
    if cli.tol.is_some() {
        cfg.tol = cli.tol;
    }
    if let Some(t) = cfg.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Config(format!("tolerance must be positive, got {t}")));
        }
    }
    let sink = Sink {
        dir: cli.out.clone().or_else(|| cfg.out.clone()),
        json: cli.json,
    };
    match cli.command {
        Command::Build => commands::build(&cfg, &sink),
        Command::Verify => commands::verify(&cfg, &sink),
        Command::Kernel => commands::kernel(&cfg, &sink),
        Command::Branches => commands::branches(&cfg, &sink),
        Command::Normalized => commands::normalized(&cfg, &sink),
        Command::Sweep => {
            let seed = cli.seed.or(cfg.seed).unwrap_or(0);
            commands::sweep(&cfg, &sink, seed, threads_from_env()?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
