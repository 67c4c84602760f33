use thiserror::Error;

/// Errors raised anywhere in the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unsupported gate {gate} on {backend} backend")]
    UnsupportedGate { gate: String, backend: String },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("amplitudes are not normalized (norm² = {0})")]
    Normalization(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no convergence: p = {p} is not below the threshold p_T = {p_t} (above threshold)")]
    NoConvergence { p: f64, p_t: f64 },

    #[error("gadget aborted: ancilla preparation rejected {attempts} times")]
    GadgetAbort { attempts: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error in field `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
