use thiserror::Error;

use crate::realizability::RealizabilityReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{matrix}: expected shape {expected_rows}x{expected_cols}, found {rows}x{cols}")]
    Shape {
        matrix: String,
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("{matrix} is not skew-symmetric (residual {residual:e})")]
    NotSkew { matrix: String, residual: f64 },

    #[error("{matrix} is not Hermitian (residual {residual:e})")]
    NotHermitian { matrix: String, residual: f64 },

    #[error("{matrix} is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositive { matrix: String, min_eigenvalue: f64 },

    #[error("precondition violated: {what} (residual {residual:e})")]
    Precondition { what: String, residual: f64 },

    #[error("inconsistent linear equation {what} (residual {residual:e})")]
    Inconsistent { what: String, residual: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("no admissible candidate vector while {0}")]
    DegenerateBasis(String),

    #[error("system is not physically realizable (worst condition: {})", .0.worst.as_deref().unwrap_or("-"))]
    NotRealizable(Box<RealizabilityReport>),

    #[error("non-finite value at integration step {step}")]
    NonFinite { step: usize },

    #[error("invalid input: {0}")]
    Invalid(String),
}
