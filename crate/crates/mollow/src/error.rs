//! Error type shared by all modules.
//!
//! The three variants map onto the distinct failure classes surfaced by the
//! CLI: invalid input / failed sequence validation, numeric failures
//! (norm drift, quadrature inadequacy), and parse errors in the sequence
//! text format.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition, or a sequence failed
    /// validation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A numeric invariant was violated (e.g. state norm drifted beyond
    /// tolerance, or a quadrature cannot resolve the requested horizon).
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The sequence text format could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Convenience constructor for [`Error::InvalidInput`].
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Convenience constructor for [`Error::Numeric`].
    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// Convenience constructor for [`Error::Parse`].
    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
