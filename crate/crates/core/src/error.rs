use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("index {index:?} out of range for dims {dims:?}")]
    Index { index: Vec<usize>, dims: Vec<usize> },

    #[error("mode {mode} out of range for order {order}")]
    Mode { mode: usize, order: usize },

    #[error("rank {rank} invalid: {reason}")]
    Rank { rank: usize, reason: String },

    #[error("sampling budget must be at least 1, got {0}")]
    Budget(u64),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("non-finite value at linear index {0}")]
    NonFinite(usize),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("invalid generator spec: {0}")]
    Spec(String),

    #[error("invalid plan: {0}")]
    Plan(String),

    #[error("log-log fit failed: {0}")]
    Fit(String),

    #[error("eigengap is degenerate (gap {gap:e} vs sigma_1 {sigma_1:e})")]
    GapDegenerate { gap: f64, sigma_1: f64 },

    #[error("undefined: {0}")]
    Undefined(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Coarse classification used by the CLI to choose an exit code.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Shape(_)
            | Error::Index { .. }
            | Error::Mode { .. }
            | Error::Rank { .. }
            | Error::Budget(_)
            | Error::Contract(_) => ErrorKind::Usage,
            Error::NonFinite(_)
            | Error::Format { .. }
            | Error::Spec(_)
            | Error::Plan(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => ErrorKind::Data,
            Error::Fit(_) | Error::GapDegenerate { .. } | Error::Undefined(_) => {
                ErrorKind::Numerical
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numerical,
}
