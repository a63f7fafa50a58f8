//! Error type shared by all modules.

use thiserror::Error;

/// Errors raised by scenario construction, estimation, evaluation and
/// optimization routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RisError {
    /// A configuration value violates its documented invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// Two nodes of the scenario coincide, so path loss is undefined.
    #[error("zero distance between {0}")]
    ZeroDistance(String),
    /// A distance argument was not strictly positive.
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    /// Vector or matrix dimensions are inconsistent.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A matrix that must be inverted is singular or too ill-conditioned.
    #[error("ill-conditioned matrix (condition number {0:.3e} exceeds limit)")]
    IllConditioned(f64),
    /// Training overhead consumes the whole coherence block.
    #[error("training overhead {overhead} symbols leaves no data symbols in a block of {tau_c}")]
    InfeasibleOverhead {
        /// Training symbols S·τ_S.
        overhead: f64,
        /// Coherence block length τ_C.
        tau_c: f64,
    },
    /// A computation produced NaN or infinity.
    #[error("non-finite value in {0}")]
    NonFinite(String),
    /// The requested operation does not apply to the fading model.
    #[error("fading mismatch: {0}")]
    FadingMismatch(String),
}

/// Convenience alias.
pub type Result<T> = std::result::Result<T, RisError>;
