use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid mask: {0}")]
    InvalidMask(String),

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value at grid index {0}")]
    NonFinite(usize),

    #[error("invalid fractional order {0}: must lie strictly inside (0, 1)")]
    InvalidOrder(f64),

    #[error("invalid operator parameter: {0}")]
    InvalidParameter(String),

    #[error("coefficient violates {condition} at grid index {index} (margin {margin:e})")]
    InvalidCoefficient {
        condition: &'static str,
        index: usize,
        margin: f64,
    },

    #[error("imaginary residue {residue:e} after inverse transform exceeds {tolerance:e}")]
    ImaginaryResidue { residue: f64, tolerance: f64 },

    #[error("evaluation point {0} is not a grid index")]
    OffGrid(usize),

    #[error("Krylov solver did not converge: relative residual {residual:e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },

    #[error("{0} block is numerically singular")]
    Singular(&'static str),

    #[error("degenerate decomposition: {0}")]
    Degenerate(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("time step {step}: {source}")]
    TimeStep { step: usize, source: Box<Error> },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed field file: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
