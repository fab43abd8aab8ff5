use thiserror::Error;

/// Errors raised by the operator algebra and the certification pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site dimension mismatch: {left} vs {right}")]
    SiteDimMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("site count {requested} out of range (operator has {available} sites)")]
    SitesOutOfRange { requested: usize, available: usize },

    #[error("operator is not hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("invalid occupation vector {counts:?} for n = {n}, d = {d}")]
    InvalidOccupation { counts: Vec<usize>, n: usize, d: usize },

    #[error("integer overflow computing {0}")]
    Overflow(String),

    #[error("size {size} exceeds limit {limit}")]
    TooLarge { size: u128, limit: u128 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

pub type Result<T> = std::result::Result<T, Error>;
