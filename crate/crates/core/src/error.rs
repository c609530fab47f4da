use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),

    #[error("matrix is not Hermitian (relative asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("Cholesky factorization failed: matrix is not positive definite")]
    Singular,

    #[error("row {row} is zero; boundary projection is undefined")]
    DegenerateRow { row: usize },

    #[error("auxiliary variable for target {target} vanished; receive filter update is undefined")]
    StalledAuxiliary { target: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
