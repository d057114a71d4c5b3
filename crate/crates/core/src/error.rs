use thiserror::Error;

use crate::fisher::Singularity;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate covariance: det = {det:e}, threshold = {threshold:e}")]
    DegenerateCovariance { det: f64, threshold: f64 },

    #[error("matrix is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular Fisher matrix (condition number {condition:e}); unidentifiable direction {direction}")]
    SingularFisher { condition: f64, direction: String },

    #[error("singular coefficient matrix ({class}); det factor = {det_factor:e}")]
    SingularCoefficient { class: Singularity, det_factor: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
