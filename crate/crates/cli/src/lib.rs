//! Workspace loading, reports and the command implementations behind the
//! `impasm` binary.

pub mod commands;
pub mod report;
pub mod workspace;

use thiserror::Error;

pub use report::{Report, Verdict};
pub use workspace::{LoadOptions, Workspace};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{file}:{line}: {message}")]
    Parse { file: String, line: usize, message: String },
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error(transparent)]
    Core(#[from] impasm::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit status for a failed run.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
