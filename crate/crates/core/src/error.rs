use thiserror::Error;

#[derive(Debug, Error)]
pub enum VistaError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("planning failed: {0}")]
    Planning(String),
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = VistaError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> VistaError {
    VistaError::InvalidInput(msg.into())
}
