//! Convergence-history rows shared by the solvers and the harness.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Inner,
    Outer,
    Standalone,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Inner => "inner",
            Phase::Outer => "outer",
            Phase::Standalone => "standalone",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inner" => Ok(Phase::Inner),
            "outer" => Ok(Phase::Outer),
            "standalone" => Ok(Phase::Standalone),
            other => Err(format!("unknown phase `{other}`")),
        }
    }
}

/// One point on a convergence curve.
///
/// `relative_residual` is always measured against the initial residual of
/// the whole run, so inner and outer curves of a nested solve share a scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub cumulative_inner_iters: usize,
    pub cumulative_matvecs: usize,
    pub outer_iter: usize,
    pub phase: Phase,
    pub residual_norm: f64,
    pub relative_residual: f64,
}

/// Receiver for history rows emitted while a solver runs.
pub trait HistorySink {
    fn record(&mut self, row: HistoryRow);
}

/// Discards every row.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoHistory;

impl HistorySink for NoHistory {
    fn record(&mut self, _row: HistoryRow) {}
}

impl<F: FnMut(HistoryRow)> HistorySink for F {
    fn record(&mut self, row: HistoryRow) {
        self(row)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceHistory {
    pub rows: Vec<HistoryRow>,
}

impl ConvergenceHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&HistoryRow> {
        self.rows.last()
    }

    pub fn rows_with_phase(&self, phase: Phase) -> impl Iterator<Item = &HistoryRow> {
        self.rows.iter().filter(move |r| r.phase == phase)
    }

    /// True when both cumulative counters never decrease.
    pub fn counters_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| {
            w[0].cumulative_inner_iters <= w[1].cumulative_inner_iters
                && w[0].cumulative_matvecs <= w[1].cumulative_matvecs
        })
    }
}

impl HistorySink for ConvergenceHistory {
    fn record(&mut self, row: HistoryRow) {
        self.rows.push(row);
    }
}
