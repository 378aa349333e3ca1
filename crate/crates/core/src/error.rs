use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid size {0}: must be a power of two and at least 4")]
    InvalidGrid(usize),

    #[error("grid mismatch: {left} vs {right} modes")]
    GridMismatch { left: usize, right: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("solution diverged at step {step} (L2 norm {norm:e})")]
    Diverged { step: usize, norm: f64 },

    #[error("oracle evaluation limited to N <= {max}, got {n}")]
    OracleTooLarge { n: usize, max: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed record: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag used by the CLI's JSON error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid_grid",
            Error::GridMismatch { .. } => "grid_mismatch",
            Error::NonFinite(_) => "non_finite",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Diverged { .. } => "diverged",
            Error::OracleTooLarge { .. } => "oracle_too_large",
            Error::Config(_) => "config",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
