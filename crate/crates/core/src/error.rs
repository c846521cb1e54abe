use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(
        "matrix is not Hermitian: |H[{row}][{col}] - conj(H[{col}][{row}])| = {deviation:e} exceeds {tolerance:e}"
    )]
    NotHermitian {
        row: usize,
        col: usize,
        deviation: f64,
        tolerance: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("site index {site} out of range for a {dim}-site network")]
    SiteOutOfRange { site: usize, dim: usize },

    #[error("initial and final site must differ (both are {0})")]
    SameSite(usize),

    #[error("invalid spin pair: n = {n}, j = {two_j}/2")]
    InvalidSpin { n: u32, two_j: u32 },

    #[error("total bath spin count {total} exceeds the limit of {limit}")]
    TooManySpins { total: u32, limit: u32 },

    #[error("bath configuration has {count} sectors, limit is {limit}")]
    TooManySectors { count: u128, limit: usize },

    #[error("spin total must be even, got {0}")]
    OddSpinTotal(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("record store {path}: {message} (record {key})")]
    Persistence {
        path: String,
        key: String,
        message: String,
    },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
