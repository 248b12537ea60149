use std::io;

use thiserror::Error;
use vista_core::VistaError;

#[derive(Debug, Error)]
pub enum SimError {
    /// Scenario or scene description rejected before any stepping.
    #[error("setup error: {0}")]
    Setup(String),
    #[error(transparent)]
    Core(#[from] VistaError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;

pub(crate) fn setup(msg: impl Into<String>) -> SimError {
    SimError::Setup(msg.into())
}
