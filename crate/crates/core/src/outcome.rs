use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sparse::SparseError;

/// Errors raised before a solver starts iterating.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Dimension(#[from] SparseError),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakdownReason {
    /// `(r_j, r0*)` vanished relative to the operand norms.
    RhoZero,
    /// `(A p_j, r0*)` vanished relative to the operand norms.
    AlphaDenominator,
    /// `A s_j = 0` while `s_j != 0`.
    OmegaDenominator,
    /// A scalar or norm became NaN or infinite.
    Nonfinite,
}

impl BreakdownReason {
    pub fn label(self) -> &'static str {
        match self {
            BreakdownReason::RhoZero => "rho_zero",
            BreakdownReason::AlphaDenominator => "alpha_denominator",
            BreakdownReason::OmegaDenominator => "omega_denominator",
            BreakdownReason::Nonfinite => "nonfinite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutcomeTag {
    Converged,
    Breakdown {
        reason: BreakdownReason,
        iteration: usize,
    },
    Stagnation,
    MaxIterations,
}

impl fmt::Display for OutcomeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeTag::Converged => f.write_str("Converged"),
            OutcomeTag::Breakdown { reason, iteration } => {
                write!(f, "Breakdown({} @ {})", reason.label(), iteration)
            }
            OutcomeTag::Stagnation => f.write_str("Stagnation"),
            OutcomeTag::MaxIterations => f.write_str("MaxIterations"),
        }
    }
}

/// Terminal status of a solve.
///
/// `iterations` counts completed iterations of the solver that produced the
/// outcome (outer steps for the residual-cutting loop).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOutcome {
    pub tag: OutcomeTag,
    pub iterations: usize,
    pub final_relative_residual: f64,
}

impl SolverOutcome {
    pub fn is_converged(&self) -> bool {
        self.tag == OutcomeTag::Converged
    }

    pub fn is_breakdown(&self) -> bool {
        matches!(self.tag, OutcomeTag::Breakdown { .. })
    }
}
