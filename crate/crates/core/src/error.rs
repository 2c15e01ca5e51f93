//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by library calls.
///
/// Binaries wrap these in `anyhow` for reporting; library code returns
/// them directly so callers can match on the failure class.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two containers that must agree in shape did not.
    #[error("shape mismatch in {context}: expected {expected}, got {got}")]
    ShapeMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// A configuration file or override failed validation.
    #[error("config error: {0}")]
    Config(String),

    /// A checkpoint or dataset file is malformed or version-incompatible.
    #[error("format error in {path}: {reason}")]
    Format { path: String, reason: String },

    /// A numerical routine left its domain of validity.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Shorthand for `Error::InvalidArgument` with formatting.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Shorthand for `Error::Config` with formatting.
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
