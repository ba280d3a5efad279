use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("state is not faithful on the algebra (min Gram eigenvalue {min_eig:.3e})")]
    NotFaithful { min_eig: f64 },

    #[error("element is not in the algebra (projection residual {residual:.3e})")]
    NotInAlgebra { residual: f64 },

    #[error("functional is not positive (min Gram eigenvalue {min_eig:.3e})")]
    NotPositive { min_eig: f64 },

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid action: {0}")]
    InvalidAction(String),

    #[error("systems are defined over different groups")]
    GroupMismatch,

    #[error("invalid factor: {0}")]
    InvalidFactor(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_mismatch(expected: impl ToString, got: impl ToString) -> Error {
    Error::DimensionMismatch {
        expected: expected.to_string(),
        got: got.to_string(),
    }
}
