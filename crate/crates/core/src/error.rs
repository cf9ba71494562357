use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix entry ({row}, {col}) is not finite")]
    NotFinite { row: usize, col: usize },

    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {actual}")]
    EntryCount {
        rows: usize,
        cols: usize,
        expected: usize,
        actual: usize,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (max |h_ij - h_ji| = {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("operation is undefined for the zero matrix")]
    ZeroMatrix,

    #[error("column {index} is zero (2-norm {norm:e})")]
    ZeroColumn { index: usize, norm: f64 },

    #[error("column {index} is not standardized (2-norm {norm})")]
    NotStandardized { index: usize, norm: f64 },

    #[error("invalid column subset: {0}")]
    InvalidSubset(String),

    #[error("sign enumeration over {cols} columns exceeds the cap of {cap}")]
    EnumerationCap { cols: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("objective returned a non-finite value at iteration {iteration}")]
    NonFiniteObjective { iteration: usize },

    #[error("weight {index} vanished but the matching column has norm {norm:e}")]
    ZeroWeightColumn { index: usize, norm: f64 },

    #[error("factorization infeasible: best objective value {eta:e} exceeds the cap {cap:e}")]
    Infeasible { eta: f64, cap: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("invariant violated: {0}")]
    InvariantViolated(String),
}

impl Error {
    /// True for failures of an iterative solver, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::Infeasible { .. }
                | Error::InvariantViolated(_)
                | Error::NonFiniteObjective { .. }
        )
    }
}
