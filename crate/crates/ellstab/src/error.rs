//! Error type shared by every module of the library.

use thiserror::Error;

/// Failures raised by evaluation, enumeration and solving routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where a series or product converges.
    #[error("domain error: {0}")]
    Domain(String),
    /// A denominator vanished or a restriction turned out to be singular.
    #[error("singular evaluation: {0}")]
    Singular(String),
    /// A configured size budget would be exceeded.
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// A torus weight was exactly zero, so the chamber does not decide the sign.
    #[error("ambiguous chamber: {0}")]
    Chamber(String),
    /// Malformed input such as a negative dimension or mismatched lengths.
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
