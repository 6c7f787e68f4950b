use thiserror::Error;

/// Errors produced by the census, spectral and asymptotic routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument violates the operation's preconditions.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// The requested size is outside what the chosen engine supports.
    #[error("capacity exceeded: {message} (hint: {hint})")]
    Capacity { message: String, hint: String },
    /// The input does not carry the data the operation needs.
    #[error("missing data: {0}")]
    State(String),
    /// A floating-point result could not be rounded reliably.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// A validation check failed its tolerance.
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>, hint: impl Into<String>) -> Self {
        Error::Capacity {
            message: msg.into(),
            hint: hint.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
