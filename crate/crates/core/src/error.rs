use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input violates a type invariant (non-positive cost, empty market, ...).
    #[error("invalid input: {0}")]
    Validation(String),

    /// The input is well formed but outside the domain of the requested formula.
    #[error("outside domain: {0}")]
    Domain(String),

    /// The general-regime investment iteration left the unique-price region.
    #[error("no equilibrium in analyzed region: {0}")]
    NoEquilibriumInRegion(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Validation(format!("{name} must be positive and finite, got {value}")))
    }
}

pub(crate) fn require_non_negative(name: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::Validation(format!("{name} must be non-negative and finite, got {value}")))
    }
}
