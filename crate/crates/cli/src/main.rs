//! `graphon-control <command> --config <file> [--out <dir>] [--format csv|json] [--jobs K]`

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use graphon_core::Error as CoreError;

/// Replaces every seed list in a config, and the seed of a uniform x0.
pub const SEED_ENV: &str = "GRAPHON_CONTROL_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "graphon-control",
    version,
    about = "Graphon-based network control experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Leading eigenpairs of a discretized graphon.
    Spectra(Options),
    /// Distances between sampled networks and their limit.
    Sample(Options),
    /// State-to-state control through the limit system.
    Gssc(Options),
    /// Network LQR with the limit Riccati solution.
    Glqr(Options),
    /// A sample, gssc or glqr run chosen by the config's "experiment" key.
    Sweep(Options),
}

#[derive(clap::Args, Debug, Clone)]
pub struct Options {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Spectra,
    Sample,
    Gssc,
    Glqr,
    Sweep,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Spectra => "spectra",
            Kind::Sample => "sample",
            Kind::Gssc => "gssc",
            Kind::Glqr => "glqr",
            Kind::Sweep => "sweep",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Core(CoreError::Numeric { .. }) => 3,
            CliError::Core(CoreError::Controllability(_) | CoreError::SingularGramian { .. }) => 4,
            CliError::Core(_) => 2,
        }
    }
}

fn main() -> ExitCode {
    let (kind, opts) = match Cli::parse().command {
        Command::Spectra(o) => (Kind::Spectra, o),
        Command::Sample(o) => (Kind::Sample, o),
        Command::Gssc(o) => (Kind::Gssc, o),
        Command::Glqr(o) => (Kind::Glqr, o),
        Command::Sweep(o) => (Kind::Sweep, o),
    };
    match commands::run(kind, &opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
