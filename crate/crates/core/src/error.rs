use thiserror::Error;

/// Errors raised by the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("position {q} outside the potential domain: {reason}")]
    Domain { q: f64, reason: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time velocity diverges at turning point q = {q}")]
    TurningPoint { q: f64 },

    #[error(
        "path [{start}, {end}] crosses an interior turning point at q = {at}; split the path first"
    )]
    InteriorTurningPoint { start: f64, end: f64, at: f64 },

    #[error("unsupported: {0}")]
    Unsupported(&'static str),

    #[error("series did not converge after {terms} terms (last term magnitude {last_term:e})")]
    NonConvergence { terms: usize, last_term: f64 },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("effective potential shift is singular at q = {q} (V = 0 with nonzero force)")]
    SingularShift { q: f64 },

    #[error("quadrature failed to reach tolerance {tolerance:e} (estimate {estimate:e})")]
    Quadrature { tolerance: f64, estimate: f64 },

    #[error("step size underflow at q = {q}")]
    StepUnderflow { q: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
