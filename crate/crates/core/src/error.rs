use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("triplet index ({row}, {col}) out of range for a {n}x{n} matrix")]
    IndexOutOfRange { row: usize, col: usize, n: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("relative tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("conjugate gradients stopped after {iterations} iterations at relative residual {rel_residual:e}")]
    NotConverged { iterations: usize, rel_residual: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("refinement level {level} outside 0..={max}")]
    LevelOutOfRange { level: u32, max: u32 },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("cannot prolongate from level {coarse} to level {fine}")]
    NonNested { coarse: u32, fine: u32 },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("reference run reached the iteration cap ({0}) before the tolerance")]
    ReferenceNotConverged(usize),
    #[error("malformed reference file: {0}")]
    Format(String),
    #[error(transparent)]
    Run(#[from] crate::admm::RunError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
