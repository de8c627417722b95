//! Mild-solution solver for fractional differential variational inequalities.

// NaN must fail range checks, so `!(x > 0.0)` is intended throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod evolution;
pub mod fracops;
pub mod hypotheses;
pub mod mittag_leffler;
pub mod quadrature;
pub mod vi_solver;
