//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, simulation and estimation.
#[derive(Debug, Clone, Error)]
pub enum AllPassError {
    /// An argument fell outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The coefficient vector does not form a causal polynomial.
    #[error("non-causal parameter vector: {0}")]
    NonCausal(String),

    /// Input data is unusable (too short, malformed, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// A degenerate configuration with no meaningful answer.
    #[error("degenerate case: {0}")]
    Degenerate(String),

    /// A numeric routine failed to converge or hit a singularity.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The asymptotic theory does not apply to the requested combination,
    /// e.g. assumption A5 (sigma^2 * L > K) fails for Gaussian noise.
    #[error("asymptotic theory inapplicable: {0}")]
    TheoryInapplicable(String),

    /// The optimizer could not produce an estimate.
    #[error("estimation failure: {0}")]
    EstimationFailure(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, AllPassError>;
