use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("{what} is degenerate")]
    Degenerate { what: String },

    #[error("verification of {what} failed (residual {residual:.3e})")]
    Verification { what: String, residual: f64 },

    #[error("metric is not Ad(H)-invariant (residual {residual:.3e})")]
    NonInvariantMetric { residual: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("moment map undefined at origin")]
    MomentMapAtOrigin,

    #[error("moment flow did not converge in {steps} steps (last residual {residual:.3e})")]
    NonConvergence { steps: usize, residual: f64 },

    #[error("integration halted at step {step} (t = {t:.6}): {reason}")]
    Halted { step: usize, t: f64, reason: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn verification(what: impl Into<String>, residual: f64) -> Self {
        Error::Verification {
            what: what.into(),
            residual,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
