use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("drift {value} at x = {x} is outside (-1, 1)")]
    DriftOutOfRange { x: i64, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("passage schedule must start with s_0 = 1, got {0}")]
    BadFirstPassage(f64),

    #[error("custom passage schedule is not monotone at index {0}")]
    NonMonotoneSchedule(usize),

    #[error("vertex {0} is not in the kernel domain")]
    UnknownVertex(String),

    #[error("time {t} is beyond the recorded horizon {horizon}")]
    HorizonExceeded { t: f64, horizon: f64 },

    #[error("series could not be certified within {terms} terms")]
    Inconclusive { terms: u64 },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("gate failed: {0}")]
    GateFailed(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
