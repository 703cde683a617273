use alloc::boxed::Box;

use crate::polyproj::QpSolution;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("halfspace normal has zero length")]
    ZeroNormal,
    #[error("cannot sample {requested} distinct sets out of {available}")]
    SampleSizeExceeded { requested: usize, available: usize },
    #[error("Hildreth projection did not converge within {} sweeps", .0.iterations)]
    QpNonconvergence(Box<QpSolution>),
    #[error("active-set oracle found no KKT-consistent subset")]
    NoKktSubset,
    #[error("polyhedron too large for exhaustive oracle ({rows} rows, dimension {dim})")]
    OracleTooLarge { rows: usize, dim: usize },
    #[error("no active rows at the projection; improvement factor undefined")]
    NoActiveRows,
    #[error("Dykstra projection exhausted its budget of {0} set visits")]
    ProjectionBudgetExhausted(usize),
    #[error("no infeasible probe found among {0} draws")]
    NoInfeasibleProbe(usize),
    #[error("rate fit needs at least {needed} usable points, found {found}")]
    InsufficientData { needed: usize, found: usize },
    #[error("reference optimum disagrees with oracle by {0:e}")]
    OracleMismatch(f64),
}

pub type Result<T> = core::result::Result<T, Error>;
