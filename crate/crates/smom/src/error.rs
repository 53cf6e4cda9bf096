//! Crate-wide error type.

use thiserror::Error;

use crate::steincore::Status;

/// Errors raised by the library.
///
/// Estimator failures that are part of normal statistical behaviour
/// (singular systems, estimates outside the parameter space) are reported
/// through [`Status`] inside an estimate, not through this type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmomError {
    /// An argument lies outside the domain of a function.
    #[error("domain error in {func}: {detail}")]
    Domain {
        /// Name of the function that rejected the input.
        func: &'static str,
        /// Human readable description of the offending value.
        detail: String,
    },
    /// A pivot fell below the singularity threshold.
    #[error("matrix is singular to working precision")]
    Singular,
    /// Matrix or vector shapes do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// A parameter vector is outside the parameter space.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A distribution or recipe identifier could not be resolved.
    #[error("unknown identifier `{id}`; valid values: {valid}")]
    UnknownId {
        /// The identifier that was looked up.
        id: String,
        /// Comma separated list of accepted identifiers.
        valid: String,
    },
    /// A scenario or request is inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A two-step estimator received a failed first step.
    #[error("first-step estimator failed with status {0}")]
    FirstStepFailed(Status),
    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature failed to converge on [{a}, {b}]")]
    Quadrature {
        /// Lower integration limit.
        a: f64,
        /// Upper integration limit.
        b: f64,
    },
}

impl SmomError {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        SmomError::Domain {
            func,
            detail: detail.into(),
        }
    }
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, SmomError>;
