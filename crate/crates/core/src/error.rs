use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error(
        "block to invert is singular (smallest singular value {singular_value:e}, guard {guard:e})"
    )]
    SingularBlock { singular_value: f64, guard: f64 },

    #[error("evolution is not invertible at this time (smallest singular value of T is {singular_value:e})")]
    NonInvertibleEvolution { singular_value: f64 },

    #[error("symplectic eigenvalues could not be paired: {0}")]
    NumericalDegeneracy(String),

    #[error("mode index {index} out of range for {modes} modes")]
    Index { index: usize, modes: usize },

    #[error("unsupported channel: {0}")]
    UnsupportedChannel(String),

    #[error("unsupported partition: {0}")]
    UnsupportedPartition(String),

    #[error("unsupported evolution form: {0}")]
    UnsupportedForm(String),

    #[error("degenerate evolution at t = {t}: tau = {tau}")]
    DegenerateEvolution { t: f64, tau: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("quadrature did not converge: estimate {estimate:e} with error bound {error_bound:e} (requested {requested:e})")]
    Accuracy {
        estimate: f64,
        error_bound: f64,
        requested: f64,
    },

    #[error("ODE integration failed: {0}")]
    Integration(String),

    #[error("consistency check failed at t = {t}: deviation {deviation:e} exceeds {tolerance:e}")]
    Consistency {
        t: f64,
        deviation: f64,
        tolerance: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
