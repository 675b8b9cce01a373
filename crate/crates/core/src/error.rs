use std::path::PathBuf;

/// Errors raised by kernel evaluation, quadrature, factorization and ingestion.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite input to {context}")]
    NonFinite { context: &'static str },

    #[error("{function} domain error at argument {argument}")]
    Domain {
        function: &'static str,
        argument: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("factorization failed after jitter escalation to {jitter:e}")]
    Factorization { jitter: f64 },

    #[error("regularization {lambda:e} is below the numerical floor {floor:e}")]
    LambdaTooSmall { lambda: f64, floor: f64 },

    #[error("negative density {value} at grid node {index}")]
    NegativeDensity { index: usize, value: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure_finite(xs: &[f64], context: &'static str) -> Result<()> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { context })
    }
}
