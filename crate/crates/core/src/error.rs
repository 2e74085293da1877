use thiserror::Error;

/// Errors raised by the spectral toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("integer overflow: |m| = {m}, n = {n} exceeds the cap {cap}")]
    Overflow { m: i64, n: i64, cap: i64 },

    #[error("resolution too low: {0}")]
    Resolution(String),

    #[error("under-resolved in time: {samples} samples, at least {required} required")]
    UnderResolvedTime { samples: usize, required: usize },

    #[error("Picard iteration failed to contract (increment ratios {ratios:?})")]
    NonContraction { ratios: Vec<f64> },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
