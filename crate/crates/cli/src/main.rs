//! `bnsf-shock`: computes viscous shock profiles and checks them against the
//! small-amplitude estimates.

mod commands;
mod config;

use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bnsf-shock", version, about = "Viscous shock profiles of the BNSF system")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Shoot the profile and write it as CSV together with the shock data.
    Profile,
    /// Measure the estimate constants of a profile.
    Verify {
        /// Read this CSV instead of shooting.
        #[arg(long, value_name = "CSV")]
        profile: Option<PathBuf>,
    },
    /// Measure a descending list of amplitudes and check uniformity.
    Sweep {
        /// Comma-separated amplitudes, strictly descending.
        #[arg(long, value_name = "LIST", value_delimiter = ',', required = true)]
        eps: Vec<f64>,
    },
    /// Compare the closed-form derivative matrices with finite differences.
    Derivcheck,
}

/// Outcome classes, one exit code each.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("{0}")]
    ChecksFailed(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl Failure {
    pub fn config(e: impl Display) -> Self {
        Failure::Config(e.to_string())
    }

    pub fn solver(e: bnsf_shock::Error) -> Self {
        match e {
            bnsf_shock::Error::Io(_) | bnsf_shock::Error::Csv(_) => Failure::Io(e.to_string()),
            e => Failure::Solver(e.to_string()),
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::ChecksFailed(_) => 1,
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Io(_) => 4,
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let path = cli.config.ok_or_else(|| Failure::Config("--config PATH is required".into()))?;
    let mut cfg = config::RunConfig::load(&path)?;
    if let Some(dir) = cli.out {
        cfg.output.dir = dir;
    }
    match cli.command {
        Command::Profile => commands::profile(&cfg),
        Command::Verify { profile } => commands::verify(&cfg, profile.as_deref()),
        Command::Sweep { eps } => commands::sweep(&cfg, &eps),
        Command::Derivcheck => commands::derivcheck(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("bnsf-shock: {f}");
            ExitCode::from(f.code())
        }
    }
}
