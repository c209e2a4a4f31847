use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("subalgebra is not graded; homogeneous dimension needs a graded basis")]
    NotGraded,

    #[error("not a Carnot homomorphism: {0}")]
    NotHomomorphism(String),

    #[error("characteristic point: horizontal gradient vanishes")]
    CharacteristicPoint,

    #[error("point is not on the surface (f = {0})")]
    NotOnSurface(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unknown algebra {0:?}")]
    UnknownAlgebra(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
