//! Std companion to `wv-core`. It adds the `wv` command line on top of the
//! core crate, with parallel Monte Carlo and CSV/JSON output.

pub mod cli;
pub mod commands;
pub mod parallel;
pub mod spec;
pub mod sweep;
pub mod table;
pub mod verify;

use thiserror::Error;
use wv_core::WvError;

/// Errors surfaced by the command-line layer.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid or inconsistent run configuration (exit code 2).
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A model-level error while evaluating a single configuration.
    #[error(transparent)]
    Model(#[from] WvError),
    /// Reading or writing files.
    #[error(transparent)]
    Io(#[from] std::io::Error),
    /// Config file parsing or JSON output.
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    /// CSV output.
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Json(_) => 2,
            CliError::Model(WvError::Domain { .. } | WvError::InvalidDisturbance { .. }) => 2,
            _ => 1,
        }
    }
}
