use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iterative or adaptive computation did not reach its tolerance.
    #[error("no convergence: {message} (last estimate {estimate}, error bound {error})")]
    Convergence {
        message: String,
        estimate: f64,
        error: f64,
    },

    /// A floating point step became too small or produced a non-finite value.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An enumeration would exceed the exact integer range.
    #[error("size limit exceeded: {0}")]
    Size(String),

    /// Malformed textual input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
