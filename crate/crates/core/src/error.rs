use thiserror::Error;

/// Errors produced by schedule construction, simulation, and certification.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("validation error at index {index}: {reason}")]
    Validation { index: usize, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("gradient descent diverged at t = {t} (x = {x})")]
    Divergence { t: usize, x: f64 },

    #[error("not certifiable: {reason} (T = {t})")]
    NotCertifiable { t: usize, reason: String },

    #[error("not applicable: {reason} (T = {t})")]
    NotApplicable { t: usize, reason: String },

    /// An internal identity of a witness construction failed. Never expected.
    #[error("construction bug: {0}")]
    ConstructionBug(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
