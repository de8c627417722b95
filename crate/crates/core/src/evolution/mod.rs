//! Discrete mild solutions of the fractional state equation coupled to a
//! variational inequality, by Picard iteration on the solution map
//!
//! ```text
//! Gamma(theta)(xi) = E_alpha(xi^alpha A) h(theta)
//!     + int_0^xi (xi - s)^(alpha - 1) E_{alpha,alpha}((xi - s)^alpha A)
//!         [B(s, theta(s)) u(s) + f(s, theta(s))] ds
//! ```
//!
//! with `u(s)` the selected solution of the VI shifted by `g(s, theta(s))`.

mod problem;
mod solve;
mod table;

use thiserror::Error;

use crate::fracops::FracError;
use crate::mittag_leffler::MlError;
use crate::vi_solver::ViError;

pub use problem::{
    FpdviProblem, NonlocalFn, ProblemBuilder, StateMatrixFn, StateVectorFn, Trajectory,
};
pub use solve::{
    apply_gamma, fit_order, refine_and_estimate_order, solve_fpdvi, Reference, RefinementStudy,
    SolveOptions, SolveOutcome, SolveReport,
};
pub use table::OperatorFamilyTable;

#[derive(Debug, Error, Clone)]
pub enum EvolutionError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    Frac(#[from] FracError),
    #[error(transparent)]
    Vi(#[from] ViError),
    #[error("control selection failed at node {node}: {source}")]
    Selection { node: usize, source: ViError },
    #[error("iterate became non-finite after {iterations} outer iterations")]
    NonFinite { iterations: usize },
    #[error("no fixed point within {} outer iterations (last change {:e})",
        .0.report.iterations, .0.report.final_change)]
    MaxOuterExceeded(Box<SolveOutcome>),
}
