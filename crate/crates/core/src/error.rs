use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed arguments: length mismatches, weights that are not a
    /// probability vector, empty sets where a non-empty one is required.
    #[error("invalid input: {0}")]
    Input(String),

    /// A mathematical precondition of the requested operation does not hold
    /// (e.g. a contraction needs every susceptibility to be positive).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A supplied vector was expected to be a fixed point and is not.
    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end: 2 for violated
    /// preconditions, 1 for everything that is an IO, parse or input problem.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Precondition(_) | Error::Consistency(_) => 2,
            _ => 1,
        }
    }
}
