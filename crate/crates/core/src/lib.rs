//! Sparse iterative solvers for nonsymmetric linear systems: BiCGSTAB,
//! generalized residual cutting (GRC) with a modified Gram-Schmidt window,
//! and GRC-BiCGSTAB, which runs BiCGSTAB as the GRC inner loop.
//!
//! The [`harness`] module drives benchmark runs and writes plot-ready
//! convergence histories.

// `!(x > 0.0)` style checks are intentional: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bicgstab;
pub mod grc;
pub mod harness;
pub mod history;
pub mod outcome;
pub mod problems;
pub mod sparse;

pub use bicgstab::{bicgstab, bicgstab_step_check, BicgstabConfig, BicgstabResult, ShadowResidual};
pub use grc::{
    alpha_coefficient, grc_bicgstab, grc_outer, mgs_insert, AlphaFormula, GrcConfig, GrcResult,
    GrcWindow, InnerSolver,
};
pub use history::{ConvergenceHistory, HistoryRow, HistorySink, Phase};
pub use outcome::{BreakdownReason, OutcomeTag, SolverError, SolverOutcome};
pub use sparse::{SparseMatrixCsr, TripletList};
