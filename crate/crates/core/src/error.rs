use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grids do not match: {0}")]
    IncompatibleGrid(String),

    #[error("grid does not resolve kernel `{kernel}`: spacing {spacing} exceeds {required}")]
    Resolution {
        kernel: String,
        spacing: f64,
        required: f64,
    },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("grid too small: {0} (enlarge L)")]
    GridTooSmall(String),

    #[error("profile is identically zero")]
    ZeroProfile,

    #[error("power method did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("bisection failed: {0}")]
    Bisection(String),

    #[error(
        "sigma = {sigma} is inadmissible: unimodal solutions exist only for {lower} < sigma < {upper}"
    )]
    Inadmissible { sigma: f64, lower: f64, upper: f64 },

    #[error("kernel `{0}` is not supported here: {1}")]
    UnsupportedKernel(String, String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("kernel table: {0}")]
    Table(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the error stems from caller-supplied parameters rather than a
    /// numerical failure.
    pub fn is_invalid_input(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::IncompatibleGrid(_)
                | Error::Resolution { .. }
                | Error::OutOfRange(_)
                | Error::GridTooSmall(_)
                | Error::Inadmissible { .. }
                | Error::UnsupportedKernel(..)
                | Error::Domain(_)
                | Error::Table(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
