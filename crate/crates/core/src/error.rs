//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NonHermitianInput { deviation: f64 },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("eigensolver did not converge")]
    ConvergenceFailure,

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid state for (x={x}, b={b}): {reason}")]
    InvalidState { x: usize, b: usize, reason: String },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("missing state for (x={x}, b={b})")]
    MissingPair { x: usize, b: usize },

    #[error("distribution is not of the form p_xb = p_b / N")]
    NotProductUniform,

    #[error("operation requires binary strings (N = 2), found N = {0}")]
    NotBinary(usize),

    #[error("answer-vector count {count} exceeds the cap {cap}")]
    TooManyAnswerVectors { count: u128, cap: usize },

    #[error("barrier method stalled; last dual value {last_dual_bound} is a valid upper bound")]
    SolverStalled { last_dual_bound: f64 },

    #[error("measurement is incompatible with the ensemble: {0}")]
    IncompatiblePovm(String),

    #[error("invalid measurement: {0}")]
    InvalidPovm(String),

    #[error("exponent alpha must exceed 1, got {0}")]
    AlphaOutOfRange(f64),

    #[error("qubit count {0} outside the supported range 1..=6")]
    DimensionCap(usize),

    #[error("invalid Clifford encoding: {0}")]
    InvalidEncoding(String),

    #[error("average vector has zero norm; every measurement is optimal")]
    ZeroVector,

    #[error("Bloch vectors are not unit vectors")]
    NotUnitVectors,

    #[error("ensemble is not classical (states do not commute)")]
    NotClassical,

    #[error("wrong problem shape: {0}")]
    WrongShape(String),

    #[error("strategy enumeration of {0} evaluations exceeds the budget")]
    BudgetExceeded(u128),

    #[error("operation requires dimension 2, found {0}")]
    WrongDimension(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Whether the error stems from numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::ConvergenceFailure | Error::SolverStalled { .. })
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
