use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file did not match its expected on-disk layout.
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite sample value in trial {trial}, channel {channel}")]
    NonFinite { trial: usize, channel: usize },

    #[error("non-finite feature value at row {row}, column {column}")]
    NonFiniteFeature { row: usize, column: usize },

    #[error("index out of range: {0}")]
    Range(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("linear system is singular or not positive definite")]
    Singular,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }
}
