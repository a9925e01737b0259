use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid expression: {0}")]
    InvalidExpr(String),

    #[error("unsupported subdifferential: {0}")]
    UnsupportedSubdiff(String),

    #[error("minimum-norm point did not converge after {iterations} iterations (certificate residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        best: Vec<f64>,
        residual: f64,
    },

    #[error("inradius undetermined: bracket [{lower}, {upper}]")]
    UndeterminedInradius { lower: f64, upper: f64 },

    #[error("no strictly feasible point found in the search box")]
    NoSlaterPoint,

    #[error("no sign change of f in the box")]
    NoSignChangeInBox,

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
