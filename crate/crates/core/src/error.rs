use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spreading factor {0} is outside 7..=12")]
    InvalidSpreadingFactor(u8),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "duty-cycle violation for SF{sf}: device rate {rate:.6} frames/s is not below the limit {limit:.6} frames/s"
    )]
    DutyCycle { sf: u8, rate: f64, limit: f64 },

    #[error("quadrature did not converge on [{a}, {b}]: error estimate {error:.3e} after {intervals} intervals")]
    Quadrature {
        a: f64,
        b: f64,
        error: f64,
        intervals: usize,
    },

    #[error("frame-drop fixed point did not converge after {iterations} iterations (last step {step:.3e})")]
    FixedPoint { iterations: usize, step: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
