//! Command-line front end: loads a run config, dispatches one computation and
//! writes CSV/JSON artifacts.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use commands::{run, Outcome, Status};
pub use config::{load_config, ConfigError, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{module}: {message}")]
    Module { module: &'static str, message: String },
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Parser)]
#[command(name = "wavebands", version, about = "Band structure of thin periodic waveguides")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, short)]
    pub config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "WAVEBANDS_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Band table of the effective operator or of the fiber at one thickness.
    Bands {
        /// A thickness, or `effective`.
        #[arg(long, default_value = "effective")]
        epsilon: String,
        #[arg(long)]
        n_bands: Option<usize>,
    },
    /// Gap report and Borg test of the effective operator.
    Gaps,
    /// Thickness sweep against the effective operator and rate fit.
    Converge {
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
    },
    /// Weighted cross-section spectra along the period.
    Crosssec {
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        s_samples: Option<usize>,
    },
    /// Runs the invariant checks on the configured geometry.
    Validate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Bands { .. } => "bands",
            Self::Gaps => "gaps",
            Self::Converge { .. } => "converge",
            Self::Crosssec { .. } => "crosssec",
            Self::Validate => "validate",
        }
    }
}
