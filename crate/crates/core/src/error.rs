use thiserror::Error;

/// Errors raised by graph construction, the solvers and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid graph-shift operator: {0}")]
    InvalidGso(String),

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("zero-norm reference")]
    ZeroNorm,

    #[error("data error: {0}")]
    Data(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable identifier for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::InvalidGso(_) => "invalid_gso",
            Error::Infeasible(_) => "infeasible",
            Error::Decomposition(_) => "decomposition",
            Error::NonFinite(_) => "non_finite",
            Error::ZeroNorm => "zero_norm",
            Error::Data(_) => "data",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
