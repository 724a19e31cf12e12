//! Crate-wide error type.
//!
//! Domain errors (bad parameters, malformed configs, thresholds outside the
//! attainable band) are kept distinct from I/O failures so the CLI can map
//! them to different exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters or violated preconditions.
    #[error("{0}")]
    Domain(String),

    /// The requested gross-quality threshold cannot be met or is trivially
    /// met by every tour; it must lie inside the attainable band.
    #[error("quality threshold {q_star} outside attainable band [{lo}, {hi}]")]
    QualityBand { q_star: f64, lo: f64, hi: f64 },

    /// Malformed input file (JSON/CSV/LP syntax or schema).
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Format(format!("{other:?}")),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
