use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("point {z} is within the pole guard of the continuation strip")]
    PoleProximity { z: Complex64 },

    #[error("unsupported for this function variant: {0}")]
    Unsupported(&'static str),

    #[error("derivative samples do not decay at the grid boundary (relative tail {tail:e})")]
    Truncation { tail: f64 },

    #[error("matrix integrity check failed: {0}")]
    Integrity(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("tail fit unreliable (R^2 = {quality:.6}, required {required})")]
    UnreliableFit { quality: f64, required: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
