use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Inputs outside the documented domain of an operation.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A memory or dimension guard refused the request.
    #[error("guard exceeded: {what} requires {required}, limit is {limit}")]
    Guard {
        what: String,
        required: u128,
        limit: u128,
    },

    /// An iterative eigensolver stopped before reaching the requested tolerance.
    #[error(
        "no convergence after {iterations} iterations: best estimate {estimate}, residual {residual:e}"
    )]
    Convergence {
        estimate: f64,
        residual: f64,
        iterations: usize,
    },

    /// A bound was requested outside the region where its formula is defined.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Malformed external input (gate-set files).
    #[error("format error: {0}")]
    Format(String),

    /// Dense linear algebra failure.
    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
