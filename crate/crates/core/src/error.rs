use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum BanditError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("index {index} out of range for {len} arms")]
    Index { index: usize, len: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// Cholesky broke down; `pivot` is the zero-based row of the failing diagonal.
    #[error("matrix is not positive definite: pivot {pivot} has value {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse config: {0}")]
    Parse(String),
}

pub type Result<T, E = BanditError> = std::result::Result<T, E>;

pub(crate) fn param(msg: impl Into<String>) -> BanditError {
    BanditError::Parameter(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> BanditError {
    BanditError::Config(msg.into())
}
