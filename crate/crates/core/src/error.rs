use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("exponent must be a finite real number greater than 1, got {0}")]
    InvalidExponent(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vectors must have at least one entry")]
    Empty,

    #[error("weights must be finite and strictly positive")]
    NonPositiveWeight,

    #[error("block structure mismatch")]
    BlockMismatch,

    #[error("functions belong to different spaces")]
    SpaceMismatch,

    #[error("scalar kernel {index} is not positive at the base point (value {value})")]
    SingularKernel { index: usize, value: f64 },

    #[error("matrix is singular or too ill-conditioned (condition number {condition})")]
    SingularMatrix { condition: f64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("quadrature grid is empty")]
    EmptyGrid,

    #[error("input point {0} is outside the domain of the feature map")]
    OutOfDomain(String),

    #[error("loss is not differentiable; configure a smoothing width")]
    NonDifferentiableLoss,

    #[error("interpolation constraints are infeasible (least-squares residual {residual:e})")]
    Infeasible { residual: f64 },

    #[error("integer overflow in exact arithmetic")]
    Overflow,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
