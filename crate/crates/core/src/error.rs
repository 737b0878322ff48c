use thiserror::Error;

/// Failures reported by the estimators and map evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QrError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, QrError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(QrError::Domain(msg.into()))
}

pub(crate) fn parameter<T>(msg: impl Into<String>) -> Result<T> {
    Err(QrError::Parameter(msg.into()))
}
