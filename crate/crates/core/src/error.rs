//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RadError {
    /// Group/cusp combination or feature the engine does not handle.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Request outside the paper's convergence scope (e.g. weight > 0).
    #[error("out of scope: {0}")]
    OutOfScope(String),

    /// Exponent does not lie on the (Z + μ)/h grid of any component.
    #[error("incompatible exponent: {0}")]
    IncompatibleExponent(String),

    /// Explicit generator images fail the projective relations or unitarity.
    #[error("inconsistent generator images: {0}")]
    InconsistentMultiplier(String),

    /// Conditionally convergent sum whose smoothed checkpoints do not settle.
    #[error("non-convergent: {0}")]
    NonConvergent(String),

    /// Two-method quadrature disagreement beyond tolerance.
    #[error("integration failure: {0}")]
    IntegrationFailure(String),

    /// Numerical pathology (branch-cut proximity, pole of gamma, ...).
    #[error("numerical: {0}")]
    Numerical(String),

    /// Malformed input.
    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RadError>;
