use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid size n = {0} must be even and at least 2")]
    InvalidGridSize(usize),
    #[error("interval length must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error("parameter `{name}` = {value} out of range: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: String,
        reason: &'static str,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("energy Gram matrix is not positive definite")]
    GramNotPositiveDefinite,
    #[error("resolvent system singular at lambda = {lambda}")]
    SingularResolvent { lambda: f64 },
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error("singular value decomposition failed: {0}")]
    Svd(String),
    #[error("probe {probe} is not applicable: {reason}")]
    ProbeNotApplicable { probe: String, reason: String },
    #[error("fit window degenerate: {0}")]
    DegenerateFit(String),
    #[error("invalid scan request: {0}")]
    InvalidScan(String),
    #[error("invalid time integration request: {0}")]
    InvalidPropagation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
