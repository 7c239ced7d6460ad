use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} values, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("truncated support: {fraction:.3e} of the mass falls outside the sampled domain")]
    Truncation { fraction: f64 },

    #[error("numerical integrity: {0}")]
    NumericalIntegrity(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("usage: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Parse { .. } | Error::InvalidParameter(_) => 2,
            Error::Io { .. } => 4,
            Error::Dimension { .. }
            | Error::InvalidGrid(_)
            | Error::InvalidState(_)
            | Error::Truncation { .. }
            | Error::NumericalIntegrity(_) => 3,
        }
    }
}
