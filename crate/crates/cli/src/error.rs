use std::path::{Path, PathBuf};

use mmd_core::MmdError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("solver failed: {0}")]
    Solver(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Solver(_) => 4,
            CliError::Io { .. } => 5,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// A library error raised while checking inputs.
    pub fn input(e: MmdError) -> Self {
        CliError::Validation(e.to_string())
    }

    /// A library error raised by a computation on validated inputs: numeric
    /// breakdowns count as solver failures, rejected parameters as
    /// validation failures.
    pub fn run(e: MmdError) -> Self {
        match e {
            MmdError::NonFinite { .. } | MmdError::TraceTooShort { .. } | MmdError::AllBinsEmpty | MmdError::Tolerance { .. } => {
                CliError::Solver(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
