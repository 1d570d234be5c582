use thiserror::Error;

use crate::hermite::BasisSpec;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("basis mismatch: {left:?} vs {right:?}")]
    BasisMismatch { left: BasisSpec, right: BasisSpec },

    #[error("time grid mismatch")]
    GridMismatch,

    /// Signals a quadrature or factorization that produced values outside the
    /// range the mathematics allows (e.g. an indefinite covariance increment).
    #[error("numerical integrity failure: {0}")]
    NumericalIntegrity(String),

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("incomplete report: {0}")]
    IncompleteReport(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
