//! Error types shared across the crate.

use num_complex::Complex;
use thiserror::Error;

/// Errors produced by the model, profile, Evans, and contour layers.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A caller violated a documented precondition (e.g. dimension mismatch).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Input lies outside the physical or mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Shooting failed to produce a connecting orbit.
    #[error("no connecting orbit found (miss distance {miss:.3e}): {detail}")]
    ConnectionNotFound { miss: f64, detail: String },

    /// Stable/unstable splitting of a limit matrix is not well defined.
    #[error("spectral splitting degenerate at lambda = {lambda}: {detail}")]
    SplittingDegenerate { lambda: Complex<f64>, detail: String },

    /// Adaptive step size underflowed during ODE integration.
    #[error("stiff failure: step size underflow at t = {t:.6e}")]
    StiffFailure { t: f64 },

    /// The asymptotic curve fit could not be performed.
    #[error("asymptotic fit failure: {0}")]
    FitFailure(String),

    /// Two supposedly equivalent evaluation routes disagreed.
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;

impl CoreError {
    pub fn contract(msg: impl Into<String>) -> Self {
        CoreError::Contract(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        CoreError::Domain(msg.into())
    }
}
