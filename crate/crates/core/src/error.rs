use thiserror::Error;

/// Failures shared by every module.
///
/// The CLI maps [`Error::is_domain`] errors to exit code 2 and
/// non-convergence to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("input is not a nonnegative measure: grid minimum {min_value:e} at x = {at}")]
    NotAMeasure { min_value: f64, at: f64 },

    #[error("ill-conditioned root pairing: residual {pairing_residual:e} (limit {limit:e}); {detail}")]
    Conditioning { pairing_residual: f64, limit: f64, detail: String },

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("infeasible by support: frequency {frequency} carries mass but is not in F - F")]
    InfeasibleBySupport { frequency: i64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the error describes bad mathematical input rather than I/O.
    pub fn is_domain(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::Parse(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
