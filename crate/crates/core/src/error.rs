use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension {0}: truncated Fock spaces need at least two levels")]
    InvalidDimension(usize),

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Probability mass discarded by the truncation exceeds the allowed threshold.
    #[error("truncation error {discarded:.3e} exceeds threshold; use dim >= {suggested_dim}")]
    Truncation {
        discarded: f64,
        suggested_dim: usize,
    },

    #[error("product dimension {0} exceeds the dense cap of {cap}", cap = crate::fock::MAX_PRODUCT_DIM)]
    DimensionCap(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("degenerate measurement: observable variance {0} is not positive")]
    DegenerateMeasurement(f64),

    #[error(
        "optimisation did not converge after {iterations} iterations (best value {best_value})"
    )]
    OptimizationFailure {
        iterations: usize,
        best_value: f64,
        best_point: Vec<f64>,
    },

    #[error("quadrature did not reach tolerance: estimate {estimate} with error {error:.3e}")]
    AccuracyFailure { estimate: f64, error: f64 },

    #[error("domain error: {0}")]
    Domain(String),
}

pub(crate) fn check_param(
    name: &'static str,
    value: f64,
    ok: bool,
    reason: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}
