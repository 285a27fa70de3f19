use thiserror::Error;

/// Errors surfaced by geometry, transform, and inversion routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("zero vector not allowed: {0}")]
    ZeroVector(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is rank deficient or numerically singular: {0}")]
    Singular(String),

    #[error("plane does not meet the open unit ball: {0}")]
    InvalidPlane(String),

    #[error("spherical section is empty or tangent")]
    EmptySection,

    #[error("evaluation at a pole of the Möbius map")]
    Pole,

    #[error("accuracy failure: {0}")]
    Accuracy(String),

    #[error("extrapolation outside sampled data: {0}")]
    Extrapolation(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
