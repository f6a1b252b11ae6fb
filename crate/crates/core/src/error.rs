use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid die: {0}")]
    InvalidDie(String),

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("invalid deviation: {0}")]
    InvalidDeviation(String),

    #[error("invalid mixed strategy: {0}")]
    InvalidStrategy(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Quadrature did not converge within the subdivision budget. Carries the
    /// best available estimate and its error bound.
    #[error("quadrature failed to converge: estimate {estimate}, error {error}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("strategy grid is empty")]
    EmptyGrid,

    /// A matrix cache file exists but was built for different parameters.
    #[error("matrix cache mismatch: {0}")]
    CacheMismatch(String),

    /// A matrix cache file failed its integrity check.
    #[error("matrix cache corrupt: {0}")]
    CacheCorrupt(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
