use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Invalid kernel, penalty or grid configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Required data block missing or blocks of incompatible shape.
    #[error("schema error: {0}")]
    Schema(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("unsupported operation: {0}")]
    Unsupported(&'static str),

    /// Cholesky factorization failed even after diagonal jitter escalation.
    #[error("factorization of the regularized Gram matrix failed (final jitter {jitter:e})")]
    Factorization { jitter: f64 },

    /// A leave-one-out or trace denominator vanished.
    #[error("degenerate hat matrix at lambda = {lambda:e}")]
    DegenerateHat { lambda: f64 },

    #[error("penalty tuning failed: every candidate was degenerate")]
    TuningFailed,
}

impl Error {
    /// True for failures caused by the numbers rather than the request.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Factorization { .. } | Error::DegenerateHat { .. } | Error::TuningFailed)
    }
}
