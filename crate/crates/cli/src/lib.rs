//! Command-line front end: run configuration, command runners and persisted outputs.

pub mod commands;
pub mod config;
pub mod output;

use thiserror::Error;

pub use config::{Command, RunConfig};
pub use output::{Check, Manifest};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{0}")]
    Compute(String),
    #[error("output: {0}")]
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config { .. } => 2,
            RunError::Compute(_) | RunError::Io(_) => 3,
        }
    }
}

/// Exit code when `--check` is requested and an assertion fails.
pub const CHECK_FAILED: i32 = 4;

/// Execute one configured command and write its outputs plus `manifest.json`.
pub fn run(config: &RunConfig) -> Result<Manifest, RunError> {
    let mut out = output::OutputSet::new(&config.output_dir);
    let (summary, checks) = commands::dispatch(config, &mut out)?;
    out.finish(config, summary, checks)
}
