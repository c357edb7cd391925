use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degree too large: {degree} exceeds the recurrence ceiling {max}")]
    DegreeTooLarge { degree: usize, max: usize },

    #[error("quadrature order {0} out of range 1..=300")]
    QuadratureOrder(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-normalizable eigenfunction: |epsilon| = {0} must be < 1")]
    NonNormalizable(f64),

    #[error("degenerate quadratic form")]
    DegenerateForm,

    #[error("quadratic form has a non-positive-definite real part (regularization {delta})")]
    NonConvergentForm { delta: f64 },

    #[error("caustic time t = {0}: propagator kernel is singular")]
    Caustic(f64),

    #[error("degenerate frequencies: transformation singular (omega1 = {0}, omega2 = {1})")]
    DegenerateFrequencies(f64, f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("integration blew up at t = {0}")]
    Blowup(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
