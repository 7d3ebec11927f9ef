use thiserror::Error;

/// Errors raised by state construction, branch analysis and calibration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("undefined quantity: {0}")]
    Undefined(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Stable short tag used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::InvalidState(_) => "invalid_state",
            Error::Unsupported(_) => "unsupported",
            Error::Undefined(_) => "undefined",
            Error::Calibration(_) => "calibration",
            Error::Config(_) => "config",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
