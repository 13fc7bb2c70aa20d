//! Error type shared by every module.

use thiserror::Error;

/// Library-wide error.
#[derive(Debug, Error)]
pub enum Error {
    /// Input text could not be parsed; the message names the offending
    /// block or line.
    #[error("parse error: {0}")]
    Parse(String),

    /// Parsed data violates a model invariant (duplicate ids, zero
    /// reactance, slack count, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// An operation required connectivity that the network does not have,
    /// or an outage would split it.
    #[error("islanding: {0}")]
    Islanding(String),

    /// A precondition stated on the operation was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A combinatorial guard refused the input size.
    #[error("guard: {0}")]
    Guard(String),

    /// Numerical factorization failed (singular matrix).
    #[error("singular matrix: {0}")]
    Singular(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Library-wide result.
pub type Result<T> = std::result::Result<T, Error>;
