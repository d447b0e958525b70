use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:e} exceeds {tolerance:e})")]
    NonHermitianInput { asymmetry: f64, tolerance: f64 },

    #[error("eigendecomposition did not converge for a {dim}x{dim} matrix")]
    ConvergenceFailure { dim: usize },

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("dimension {0} is outside the supported range 1..=256")]
    BadDimension(usize),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("state is not positive semidefinite (min eigenvalue {0:e})")]
    NotPSD(f64),

    #[error("state is not normalized (trace {0})")]
    NotNormalized(f64),

    #[error("invalid spectrum: {0}")]
    BadSpectrum(String),

    #[error("dimension {dim} does not factor as {dim_a} x {dim_b}")]
    BadFactorization { dim: usize, dim_a: usize, dim_b: usize },

    #[error("q = {0} outside the accepted range (1, 40]")]
    QOutOfRange(f64),

    #[error("invalid quadrature rule: {0}")]
    InvalidRule(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("non-finite intermediate value in {0}")]
    NonFinite(&'static str),

    #[error("inconsistent bound evaluation: {0}")]
    Inconsistent(String),

    #[error("state file: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
