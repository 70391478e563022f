use std::path::PathBuf;

use thiserror::Error;

/// Failures of a CLI run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("{} check(s) failed: {}", .0.len(), .0.join(", "))]
    Checks(Vec<String>),

    #[error("i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Numeric(_) | HarnessError::Checks(_) => 3,
            HarnessError::Io { .. } => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }
}

impl From<layerheat::Error> for HarnessError {
    // Inputs are validated before any solver runs, so a solver that still
    // rejects its input was handed an inconsistent configuration (for
    // instance interfaces that cross during the run).
    fn from(e: layerheat::Error) -> Self {
        match e {
            layerheat::Error::InvalidInput(msg) => HarnessError::Config(msg),
            other => HarnessError::Numeric(other.to_string()),
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;
