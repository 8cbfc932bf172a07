use thiserror::Error;

/// Errors raised by the forecasting models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Zero variance or zero range where a spread is required.
    #[error("degenerate series: {0}")]
    Degenerate(String),
    /// Input outside a model's mathematical domain (e.g. log of a nonpositive value).
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("training failed: {0}")]
    Training(String),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
