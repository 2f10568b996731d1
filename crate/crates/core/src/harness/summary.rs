use std::fmt::Write as _;

use serde::Serialize;

use crate::history::ConvergenceHistory;
use crate::outcome::{OutcomeTag, SolverOutcome};

/// Everything the comparison table needs about one finished run.
#[derive(Debug, Clone)]
pub struct SolverRun {
    pub name: String,
    pub outcome: SolverOutcome,
    pub history: ConvergenceHistory,
    pub matvecs: usize,
    /// BiCGSTAB iterations, accumulated over inner solves for nested runs.
    pub bicgstab_iterations: usize,
    /// Outer steps for nested runs, `None` for a standalone solve.
    pub outer_iterations: Option<usize>,
    pub true_relative_residual: f64,
    pub wall_time_s: f64,
    pub solution: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryLine {
    pub solver: String,
    pub outcome: OutcomeTag,
    pub outcome_text: String,
    pub breakdown_iteration: Option<usize>,
    pub iterations: usize,
    pub outer_iterations: Option<usize>,
    pub matvecs: usize,
    pub final_relative_residual: f64,
    pub true_relative_residual: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub lines: Vec<SummaryLine>,
}

/// Builds the comparison table.
///
/// Converged runs come first, cheapest (fewest matvecs) first; the rest
/// keep their input order.
pub fn summarize(results: &[SolverRun]) -> Summary {
    let mut lines: Vec<SummaryLine> = results
        .iter()
        .map(|run| SummaryLine {
            solver: run.name.clone(),
            outcome: run.outcome.tag,
            outcome_text: run.outcome.tag.to_string(),
            breakdown_iteration: match run.outcome.tag {
                OutcomeTag::Breakdown { iteration, .. } => Some(iteration),
                _ => None,
            },
            iterations: run.bicgstab_iterations,
            outer_iterations: run.outer_iterations,
            matvecs: run.matvecs,
            final_relative_residual: run.outcome.final_relative_residual,
            true_relative_residual: run.true_relative_residual,
            wall_time_s: run.wall_time_s,
        })
        .collect();
    lines.sort_by_key(|l| match l.outcome {
        OutcomeTag::Converged => (0, l.matvecs),
        _ => (1, 0),
    });
    Summary { lines }
}

impl Summary {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<14} {:<32} {:>8} {:>7} {:>9} {:>24} {:>24} {:>10}",
            "solver",
            "outcome",
            "iters",
            "outer",
            "matvecs",
            "final_rel_residual",
            "true_rel_residual",
            "time_s"
        );
        for l in &self.lines {
            let outer = l
                .outer_iterations
                .map(|m| m.to_string())
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:<14} {:<32} {:>8} {:>7} {:>9} {:>24.16e} {:>24.16e} {:>10.6}",
                l.solver,
                l.outcome_text,
                l.iterations,
                outer,
                l.matvecs,
                l.final_relative_residual,
                l.true_relative_residual,
                l.wall_time_s
            );
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}
