//! Crate-wide error type for geometry operations.

use crate::expr::{EvalError, ParseError};

#[derive(Debug, thiserror::Error)]
pub enum GeomError {
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("fields live on different charts")]
    ChartMismatch,
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("component count {got} does not match expected {expected}")]
    BadShape { expected: usize, got: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("{tag} symmetry violated: |residual| = {residual:.3e} at {point:?}")]
    SymmetryViolation {
        tag: &'static str,
        residual: f64,
        point: Vec<f64>,
    },
    #[error("metric not positive definite at {point:?}")]
    DegenerateMetric { point: Vec<f64> },
    #[error("linear map singular at {point:?} (condition ~ {cond:.3e})")]
    SingularMap { point: Vec<f64>, cond: f64 },
    #[error("unsupported valence ({r},{s}) for this operation")]
    UnsupportedValence { r: usize, s: usize },
    #[error("form degree {degree} out of range for dimension {dim}")]
    DegreeOverflow { degree: usize, dim: usize },
    #[error("operation requires {0}")]
    Precondition(String),
    #[error("tensor field `{0}` is not closed-form and cannot be exported")]
    NotClosedForm(String),
}
