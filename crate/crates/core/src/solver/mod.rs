//! Finite-difference Newton solver for the Marguerre and von Kármán systems.

mod band;
mod bc;
mod grid;
mod newton;
mod problem;
mod stencil;

use thiserror::Error;

use crate::expr::EvalError;

pub use band::{BandLu, BandMatrix, SingularMatrix};
pub use bc::{BcKind, BoundaryConditions, BoundaryData, EdgeExprs};
pub use grid::{FieldGrid, Grid, MIN_INTERIOR};
pub use newton::{solve, Solution, SolveReport, SolverOptions};
pub use problem::{DataSampling, Problem, System};
pub use stencil::{biharmonic, bracket, hessian};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("grid needs at least {min} interior points per axis, got {n1} x {n2}", min = MIN_INTERIOR)]
    GridTooSmall { n1: usize, n2: usize },
    #[error("fields live on different grids")]
    ShapeMismatch,
    #[error("could not evaluate problem data: {0}")]
    Eval(#[from] EvalError),
    #[error("Jacobian is singular: {0}")]
    Singular(#[from] SingularMatrix),
    #[error("boundary data for the deflection and the shell rise must be of the same kind")]
    BoundaryKindMismatch,
    #[error("non-finite values in the iterate")]
    NonFinite,
}
