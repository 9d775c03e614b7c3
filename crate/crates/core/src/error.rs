use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension {0}: at least 2 levels are required")]
    InvalidDimension(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator is not traceless (|Tr X| = {0:e})")]
    NotTraceless(f64),
    #[error("matrix is not Hermitian (max |X - X^dagger| = {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (max |U U^dagger - I| = {0:e})")]
    NotUnitary(f64),
    #[error("non-finite entry encountered")]
    NonFinite,
    #[error("rate {index} is invalid: {rate}")]
    InvalidRate { index: usize, rate: f64 },
    #[error("expected {expected} rates, found {found}")]
    RateCount { expected: usize, found: usize },
    #[error("not a valid Markovian generator: GKS matrix eigenvalue {0:e}")]
    NotMarkovian(f64),
    #[error("zero coefficient vector")]
    ZeroVector,
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("generator not Markovian or t too large for tolerance: {0}")]
    EvolutionDrift(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("invalid field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;
