use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{op} is not defined for the {kind} reservoir")]
    Unsupported {
        op: &'static str,
        kind: &'static str,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Markovian decay rate diverges for a zero-width reservoir")]
    DivergentRate,

    #[error("kernel series of order {have} is too short for amplitude order {need}")]
    Truncation { have: usize, need: usize },

    #[error("solver configuration rejected: {0}")]
    Config(String),

    #[error("numerical instability at z = {z}")]
    Instability { z: f64 },

    #[error("norm drift {drift:e} exceeds tolerance at z = {z}")]
    NormDrift { drift: f64, z: f64 },

    #[error("|f| = {value:e} at z = {z} is too small to take a logarithm")]
    Underflow { value: f64, z: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed trace file: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures that come from the numerics rather than from the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Instability { .. } | Error::NormDrift { .. } | Error::Underflow { .. }
        )
    }
}
