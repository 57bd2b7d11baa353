use thiserror::Error;

/// Errors raised by the solvers, diagnostics and experiment drivers.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("CFL violation: courant number {courant:.4} exceeds limit {limit}")]
    StepSize { courant: f64, limit: f64 },

    #[error("linear solve did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverNotConverged { iterations: usize, residual: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("under-resolved boundary layer: delta = {delta} needs more than {min_cells} cells of size {dy}")]
    UnderResolved { delta: f64, dy: f64, min_cells: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("sweep failed: {0}")]
    SweepFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

impl LabError {
    pub(crate) fn shape(what: impl Into<String>) -> Self {
        LabError::Shape(what.into())
    }

    pub(crate) fn config(what: impl Into<String>) -> Self {
        LabError::Config(what.into())
    }
}
