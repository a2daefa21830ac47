use thiserror::Error;

use crate::pauli::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,

    #[error("matrix is not Hermitian (max asymmetry {max_asymmetry:.3e})")]
    NotHermitian { max_asymmetry: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("density operator trace is {trace}, expected 1")]
    InvalidTrace { trace: f64 },

    #[error("density operator is not positive semi-definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("dimension mismatch: {expected}x{expected} vs {found}x{found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("spectrum is not of the form {{+l, -l}} with l > 0: {eigenvalues:?}")]
    NotPlusMinusSpectrum { eigenvalues: Vec<f64> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("observables are linearly dependent (smallest singular value {smallest_singular_value:.3e})")]
    LinearlyDependent { smallest_singular_value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Parse(#[from] ParseError),
}
