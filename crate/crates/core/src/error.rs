use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Argument outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested quantity has a pole at this spectral parameter.
    /// `k` is the nearest eigen-index `round(Re(z) L / 2π)`.
    #[error("pole of {what} near eigen-index k = {k}")]
    Pole { what: &'static str, k: i64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("quadrature did not converge after {panels} panels (error estimate {error:.3e})")]
    NonConvergence { panels: usize, error: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),
}

impl Error {
    /// True for failures that come from the numerics rather than from the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::LinearSolve(_) | Error::Pole { .. }
        )
    }
}
