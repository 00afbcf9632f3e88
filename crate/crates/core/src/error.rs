use thiserror::Error;

/// Errors raised by the noise models and the fitter.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("covariance matrix is not physical: {0}")]
    NonPhysical(String),

    #[error("pump ratio {0} is at or above the oscillation threshold (must be < 1)")]
    AboveThreshold(f64),

    #[error("readout angle has zero signal transfer (cos(phi) = 0)")]
    ZeroSignalTransfer,

    #[error("{0}")]
    Unsupported(String),

    #[error("parameters are not identifiable: {0}")]
    NonIdentifiable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn require_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(name, format!("must be finite, got {value}")))
    }
}
