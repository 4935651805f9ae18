use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("{0} is not symmetric positive definite")]
    NotPositiveDefinite(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("non-finite integrand value at {point:?}")]
    NonFinite { point: Vec<f64> },
    #[error("root finding did not converge: {0}")]
    RootFinding(String),
    #[error("tail probability {0:e} is too small to resolve; the conditioning event is numerically empty")]
    DegenerateTail(f64),
    #[error("insufficient tail mass: kept {kept} rows, need at least {required}")]
    InsufficientTailMass { kept: usize, required: usize },
    #[error("method unavailable: {0}")]
    MethodUnavailable(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
