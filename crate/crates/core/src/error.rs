use alloc::string::String;

/// Errors raised by the model and analysis routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },

    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("junction weights are both zero")]
    ZeroJunction,

    #[error("dispersive approximation is degenerate: reference and transmon frequency both equal {freq} Hz")]
    Degenerate { freq: f64 },

    #[error("dispersive shift is zero; transmon frequency cannot be inferred")]
    ZeroShift,

    #[error("semiclassical shift radicand is non-positive ({radicand})")]
    NonPositiveRadicand { radicand: f64 },

    #[error("{name} is empty")]
    EmptyGrid { name: &'static str },

    #[error("{name} must be strictly increasing (violated at index {index})")]
    NotIncreasing { name: &'static str, index: usize },

    #[error("control grid is not uniform (spacing deviates at index {index}); resample first")]
    NonUniformGrid { index: usize },

    #[error("need at least {required} points, got {got}")]
    TooShort { required: usize, got: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("every point of the resonance track is masked")]
    AllMasked,
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        Err(Error::NonFinite { name, value })
    } else if value <= 0.0 {
        Err(Error::NonPositive { name, value })
    } else {
        Ok(value)
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        Err(Error::NonFinite { name, value })
    } else if value < 0.0 {
        Err(Error::Negative { name, value })
    } else {
        Ok(value)
    }
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}
