use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = DpcError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum DpcError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: at least one point is required")]
    EmptyInput,

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("non-finite coordinate at point {point}, dimension {dim}")]
    NonFinite { point: usize, dim: usize },

    #[error("unknown strategy `{0}` (expected priority, fenwick, incomplete or bruteforce)")]
    UnknownStrategy(String),

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

    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl DpcError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DpcError::Io {
            path: path.into(),
            source,
        }
    }
}
