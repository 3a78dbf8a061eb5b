//! Experiment runner for `odro-core`: runs a zoo problem in ODRO, baseline or
//! both modes and writes convergence histories, summaries and checkpoints.

pub mod args;
pub mod checkpoint;
pub mod experiment;

pub use args::{Cli, Emit, Mode};
pub use checkpoint::{decode, encode, read_checkpoint, write_checkpoint, CheckpointError};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentReport, Outcome, RunSummary};

use odro_core::OdroError;
use thiserror::Error;

/// Exit codes of the `odro` binary.
pub mod exit {
    pub const CONVERGED: i32 = 0;
    pub const IO: i32 = 1;
    pub const NOT_CONVERGED: i32 = 2;
    pub const DIVERGED: i32 = 3;
    pub const CONFIG: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Odro(#[from] OdroError),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Odro(OdroError::DivergedTooFast { .. }) => exit::DIVERGED,
            CliError::Odro(_) => exit::CONFIG,
            CliError::Io { .. } | CliError::Checkpoint(_) => exit::IO,
        }
    }
}
