use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("Jacobi eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid group order: {0}")]
    InvalidOrder(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("representations are defined over different groups")]
    GroupMismatch,

    #[error("repeated irrep(s) {0:?}: multiplicity > 1 unsupported")]
    RepeatedIrrep(Vec<usize>),

    #[error("character inner product for irrep {label} is not an integer ({value})")]
    NonIntegerMultiplicity { label: usize, value: f64 },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("value {0} out of range")]
    OutOfRange(f64),

    #[error("component {0} does not lie in its invariant subspace (residual {1:e})")]
    SubspaceViolation(usize, f64),

    #[error("count mismatch: expected {expected}, found {found}")]
    CountMismatch { expected: usize, found: usize },

    #[error("at least two invariant subspaces are required")]
    NeedTwoSubspaces,

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
