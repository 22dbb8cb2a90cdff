use thiserror::Error;

/// Errors raised by renyikit operations.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (non-PSD input,
    /// dimension mismatch, `alpha = 1` where a Rényi order is required, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed JSON input.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
