use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not converge: error estimate {error:e} above tolerance {tolerance:e} after {subdivisions} subdivisions")]
    NoConvergence {
        error: f64,
        tolerance: f64,
        subdivisions: usize,
    },

    /// Postselected coincidence probability is too small to form a ratio.
    #[error("no signal: denominator {0:e} is below the usable threshold")]
    NoSignal(f64),

    #[error("unphysical parameter region: {0}")]
    Unphysical(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
