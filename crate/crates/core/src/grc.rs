//! Generalized residual cutting (GRC) with a modified Gram-Schmidt direction
//! window, and its composition with BiCGSTAB as the inner solver.
//!
//! Each outer step asks the inner solver for an approximate solution `psi`
//! of the residual equation `A psi = r`, orthonormalizes `A psi` against the
//! last `j - 1` stored directions `A phi_k` (applying the same coefficients
//! to `psi` itself, so `phi` and `A phi` stay paired without an extra
//! product), and cuts the residual along the new direction:
//!
//! ```text
//! r <- r - alpha A phi
//! u <- u + alpha phi
//! ```

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::bicgstab::{bicgstab, BicgstabConfig};
use crate::history::{ConvergenceHistory, HistoryRow, HistorySink, NoHistory, Phase};
use crate::outcome::{OutcomeTag, SolverError, SolverOutcome};
use crate::sparse::{check_len, dot, norm2, SparseMatrixCsr};

/// Numerator used for the step length along `A phi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaFormula {
    /// `(psi, A phi) / (A phi, A phi)`.
    PsiProjection,
    /// `(r, A phi) / (A phi, A phi)`, the minimizer of `||r - alpha A phi||`.
    ResidualMinimizing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrcConfig {
    /// Number of directions combined per step; the window keeps `window - 1`.
    pub window: usize,
    /// Outer relative residual tolerance.
    pub tol: f64,
    pub max_outer: usize,
    pub alpha_formula: AlphaFormula,
    /// Relative degeneracy threshold for the Gram-Schmidt sweep and for
    /// rejecting a vanishing inner direction.
    pub mgs_eps: f64,
}

impl Default for GrcConfig {
    fn default() -> Self {
        Self {
            window: 5,
            tol: 1e-12,
            max_outer: 1000,
            alpha_formula: AlphaFormula::ResidualMinimizing,
            mgs_eps: 1e-10,
        }
    }
}

impl GrcConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.window == 0 {
            return Err(SolverError::InvalidConfig("window must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(SolverError::InvalidConfig("tol must be positive".into()));
        }
        if self.max_outer == 0 {
            return Err(SolverError::InvalidConfig("max_outer must be >= 1".into()));
        }
        if !(self.mgs_eps >= 0.0) {
            return Err(SolverError::InvalidConfig("mgs_eps must be >= 0".into()));
        }
        Ok(())
    }
}

/// A stored direction and its image under the operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionPair {
    pub phi: Vec<f64>,
    pub h_phi: Vec<f64>,
}

/// Sliding window of at most `j - 1` direction pairs, oldest first, whose
/// images `h_phi` are orthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct GrcWindow {
    capacity: usize,
    pairs: VecDeque<DirectionPair>,
}

impl GrcWindow {
    /// Window for parameter `j` (holds `j - 1` pairs).
    pub fn new(j: usize) -> Self {
        let capacity = j.saturating_sub(1);
        Self {
            capacity,
            pairs: VecDeque::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn clear(&mut self) {
        self.pairs.clear();
    }

    pub fn pairs(&self) -> impl Iterator<Item = &DirectionPair> {
        self.pairs.iter()
    }

    fn push(&mut self, pair: DirectionPair) {
        if self.capacity == 0 {
            return;
        }
        while self.pairs.len() >= self.capacity {
            self.pairs.pop_front();
        }
        self.pairs.push_back(pair);
    }

    /// Largest `|(h_i, h_k) - delta_ik|` over stored pairs.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.pairs.iter().enumerate() {
            for (k, b) in self.pairs.iter().enumerate().skip(i) {
                let target = if i == k { 1.0 } else { 0.0 };
                worst = worst.max((dot(&a.h_phi, &b.h_phi).unwrap() - target).abs());
            }
        }
        worst
    }
}

/// Returned when `A psi` lies (numerically) in the span of the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Degenerate {
    pub residual_norm: f64,
    pub input_norm: f64,
}

/// Orthonormalizes `h_psi` against the window by modified Gram-Schmidt,
/// applying the same coefficients to `psi`, and appends the result.
///
/// The oldest pair is evicted when the window is full. On `Degenerate` the
/// window is left untouched.
pub fn mgs_insert(
    window: &mut GrcWindow,
    psi: &[f64],
    h_psi: &[f64],
    eps: f64,
) -> Result<DirectionPair, Degenerate> {
    let mut v = h_psi.to_vec();
    let mut w = psi.to_vec();
    for pair in &window.pairs {
        let c = dot(&pair.h_phi, &v).unwrap();
        for ((vi, wi), (hk, pk)) in v
            .iter_mut()
            .zip(w.iter_mut())
            .zip(pair.h_phi.iter().zip(&pair.phi))
        {
            *vi -= c * hk;
            *wi -= c * pk;
        }
    }
    let nu = norm2(&v);
    let input_norm = norm2(h_psi);
    if !(nu > eps * input_norm) || !nu.is_finite() {
        return Err(Degenerate {
            residual_norm: nu,
            input_norm,
        });
    }
    let inv = 1.0 / nu;
    v.iter_mut().for_each(|x| *x *= inv);
    w.iter_mut().for_each(|x| *x *= inv);
    let pair = DirectionPair { phi: w, h_phi: v };
    window.push(pair.clone());
    Ok(pair)
}

/// Step length along `h_phi`.
pub fn alpha_coefficient(formula: AlphaFormula, psi: &[f64], r: &[f64], h_phi: &[f64]) -> f64 {
    let numerator = match formula {
        AlphaFormula::PsiProjection => dot(psi, h_phi).unwrap(),
        AlphaFormula::ResidualMinimizing => dot(r, h_phi).unwrap(),
    };
    numerator / dot(h_phi, h_phi).unwrap()
}

/// Result of one inner solve of the residual equation.
#[derive(Debug, Clone)]
pub struct InnerSolve {
    pub psi: Vec<f64>,
    pub iterations: usize,
    pub matvecs: usize,
    /// Rows with counters local to this solve; the outer loop rebases them.
    pub rows: Vec<HistoryRow>,
    /// Terminal status when the inner solver is itself iterative.
    pub outcome: Option<SolverOutcome>,
}

/// Approximate solver for `A psi = rhs`.
///
/// `hint` carries the previous direction `phi` (absent on the first step).
pub trait InnerSolver {
    fn solve(
        &mut self,
        a: &SparseMatrixCsr,
        rhs: &[f64],
        hint: Option<&[f64]>,
    ) -> Result<InnerSolve, SolverError>;
}

/// BiCGSTAB from a zero start as the inner solver. Breakdowns are not
/// fatal: the last consistent iterate is handed back.
#[derive(Debug, Clone)]
pub struct BicgstabInner {
    pub cfg: BicgstabConfig,
}

impl InnerSolver for BicgstabInner {
    fn solve(
        &mut self,
        a: &SparseMatrixCsr,
        rhs: &[f64],
        _hint: Option<&[f64]>,
    ) -> Result<InnerSolve, SolverError> {
        let mut hist = ConvergenceHistory::new();
        let zero = vec![0.0; a.n()];
        let res = bicgstab(a, rhs, &zero, &self.cfg, &mut hist)?;
        let rows = hist
            .rows
            .into_iter()
            .skip(1)
            .map(|row| HistoryRow {
                phase: Phase::Inner,
                ..row
            })
            .collect();
        Ok(InnerSolve {
            psi: res.x,
            iterations: res.outcome.iterations,
            matvecs: res.matvecs,
            rows,
            outcome: Some(res.outcome),
        })
    }
}

/// Per-outer-step record of the inner solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerReport {
    pub outer_iter: usize,
    pub iterations: usize,
    pub outcome: Option<SolverOutcome>,
    /// `psi` was replaced by the current residual.
    pub fallback: bool,
    /// The window was flushed to recover from a degenerate direction.
    pub flushed: bool,
}

/// Outer iterate, residual, step counter and direction window.
#[derive(Debug, Clone)]
pub struct GrcState {
    pub u: Vec<f64>,
    pub r: Vec<f64>,
    pub m: usize,
    pub window: GrcWindow,
}

#[derive(Debug, Clone)]
pub struct GrcResult {
    pub u: Vec<f64>,
    pub r: Vec<f64>,
    pub outcome: SolverOutcome,
    pub matvecs: usize,
    pub total_inner_iterations: usize,
    /// `||b - A u|| / ||r_0||`, recomputed explicitly at the end of the run.
    pub true_relative_residual: f64,
    pub inner_reports: Vec<InnerReport>,
}

/// Snapshot passed to an observer after every successful window insertion.
pub struct InsertEvent<'a> {
    pub outer_iter: usize,
    pub window: &'a GrcWindow,
    pub pair: &'a DirectionPair,
}

/// Runs the GRC outer loop. One outer history row is recorded for the
/// initial residual and after every step; inner rows are rebased onto the
/// cumulative counters and interleaved before each outer row.
pub fn grc_outer<I, S>(
    a: &SparseMatrixCsr,
    b: &[f64],
    u0: &[f64],
    inner: &mut I,
    cfg: &GrcConfig,
    history: &mut S,
) -> Result<GrcResult, SolverError>
where
    I: InnerSolver + ?Sized,
    S: HistorySink + ?Sized,
{
    grc_outer_observed(a, b, u0, inner, cfg, history, &mut |_: &InsertEvent<'_>| {})
}

/// [`grc_outer`] with a callback invoked after each window insertion.
pub fn grc_outer_observed<I, S>(
    a: &SparseMatrixCsr,
    b: &[f64],
    u0: &[f64],
    inner: &mut I,
    cfg: &GrcConfig,
    history: &mut S,
    observer: &mut dyn FnMut(&InsertEvent<'_>),
) -> Result<GrcResult, SolverError>
where
    I: InnerSolver + ?Sized,
    S: HistorySink + ?Sized,
{
    let n = a.n();
    check_len(n, b.len())?;
    check_len(n, u0.len())?;
    cfg.validate()?;

    let mut matvecs = 0usize;
    let r = if u0.iter().all(|&v| v == 0.0) {
        b.to_vec()
    } else {
        matvecs += 1;
        let au = a.matvec(u0)?;
        b.iter().zip(&au).map(|(bi, ai)| bi - ai).collect()
    };
    let r0_norm = norm2(&r);
    let rel = |norm: f64| if r0_norm > 0.0 { norm / r0_norm } else { 0.0 };

    let mut state = GrcState {
        u: u0.to_vec(),
        r,
        m: 0,
        window: GrcWindow::new(cfg.window),
    };
    let mut cum_inner = 0usize;
    let mut reports = Vec::new();
    let outer_row = |cum_inner, matvecs, m, norm: f64| HistoryRow {
        cumulative_inner_iters: cum_inner,
        cumulative_matvecs: matvecs,
        outer_iter: m,
        phase: Phase::Outer,
        residual_norm: norm,
        relative_residual: rel(norm),
    };
    history.record(outer_row(0, matvecs, 0, r0_norm));

    let finish = |state: GrcState, tag, matvecs: &mut usize, cum_inner, reports| {
        let final_relative_residual = rel(norm2(&state.r));
        let au = a.matvec(&state.u).expect("dimensions checked");
        *matvecs += 1;
        let true_res: Vec<f64> = b.iter().zip(&au).map(|(bi, ai)| bi - ai).collect();
        let true_relative_residual = rel(norm2(&true_res));
        let tag = if tag == OutcomeTag::Converged && !(true_relative_residual <= 10.0 * cfg.tol) {
            OutcomeTag::Stagnation
        } else {
            tag
        };
        GrcResult {
            u: state.u,
            r: state.r,
            outcome: SolverOutcome {
                tag,
                iterations: state.m,
                final_relative_residual,
            },
            matvecs: *matvecs,
            total_inner_iterations: cum_inner,
            true_relative_residual,
            inner_reports: reports,
        }
    };

    if r0_norm == 0.0 {
        return Ok(finish(
            state,
            OutcomeTag::Converged,
            &mut matvecs,
            0,
            reports,
        ));
    }
    if !r0_norm.is_finite() {
        return Ok(finish(
            state,
            OutcomeTag::Stagnation,
            &mut matvecs,
            0,
            reports,
        ));
    }

    let mut prev_phi: Option<Vec<f64>> = None;
    while state.m < cfg.max_outer {
        let m = state.m;
        let solve = inner.solve(a, &state.r, prev_phi.as_deref())?;
        check_len(n, solve.psi.len())?;
        for row in &solve.rows {
            history.record(HistoryRow {
                cumulative_inner_iters: cum_inner + row.cumulative_inner_iters,
                cumulative_matvecs: matvecs + row.cumulative_matvecs,
                outer_iter: m,
                phase: Phase::Inner,
                residual_norm: row.residual_norm,
                relative_residual: rel(row.residual_norm),
            });
        }
        cum_inner += solve.iterations;
        matvecs += solve.matvecs;
        let mut report = InnerReport {
            outer_iter: m,
            iterations: solve.iterations,
            outcome: solve.outcome,
            fallback: false,
            flushed: false,
        };

        let r_norm = norm2(&state.r);
        let mut psi = solve.psi;
        let mut h_psi = a.matvec(&psi)?;
        matvecs += 1;
        let h_norm = norm2(&h_psi);
        if !(h_norm > cfg.mgs_eps * r_norm) || !h_norm.is_finite() {
            psi = state.r.clone();
            h_psi = a.matvec(&psi)?;
            matvecs += 1;
            report.fallback = true;
        }

        let pair = match mgs_insert(&mut state.window, &psi, &h_psi, cfg.mgs_eps) {
            Ok(pair) => pair,
            Err(_) => {
                state.window.clear();
                report.flushed = true;
                match mgs_insert(&mut state.window, &psi, &h_psi, cfg.mgs_eps) {
                    Ok(pair) => pair,
                    Err(_) => {
                        reports.push(report);
                        return Ok(finish(
                            state,
                            OutcomeTag::Stagnation,
                            &mut matvecs,
                            cum_inner,
                            reports,
                        ));
                    }
                }
            }
        };
        reports.push(report);
        observer(&InsertEvent {
            outer_iter: m,
            window: &state.window,
            pair: &pair,
        });

        let alpha = alpha_coefficient(cfg.alpha_formula, &psi, &state.r, &pair.h_phi);
        let next_r: Vec<f64> = state
            .r
            .iter()
            .zip(&pair.h_phi)
            .map(|(ri, hi)| ri - alpha * hi)
            .collect();
        let next_norm = norm2(&next_r);
        if !alpha.is_finite() || !next_norm.is_finite() {
            return Ok(finish(
                state,
                OutcomeTag::Stagnation,
                &mut matvecs,
                cum_inner,
                reports,
            ));
        }
        for (ui, pi) in state.u.iter_mut().zip(&pair.phi) {
            *ui += alpha * pi;
        }
        state.r = next_r;
        state.m += 1;
        history.record(outer_row(cum_inner, matvecs, state.m, next_norm));

        if rel(next_norm) < cfg.tol {
            return Ok(finish(
                state,
                OutcomeTag::Converged,
                &mut matvecs,
                cum_inner,
                reports,
            ));
        }
        prev_phi = Some(pair.phi);
    }

    Ok(finish(
        state,
        OutcomeTag::MaxIterations,
        &mut matvecs,
        cum_inner,
        reports,
    ))
}

/// GRC with BiCGSTAB as the inner solver, collecting the interleaved
/// inner/outer history.
pub fn grc_bicgstab(
    a: &SparseMatrixCsr,
    b: &[f64],
    u0: &[f64],
    grc_cfg: &GrcConfig,
    inner_cfg: &BicgstabConfig,
) -> Result<(GrcResult, ConvergenceHistory), SolverError> {
    let mut history = ConvergenceHistory::new();
    let mut inner = BicgstabInner { cfg: *inner_cfg };
    let result = grc_outer(a, b, u0, &mut inner, grc_cfg, &mut history)?;
    Ok((result, history))
}

/// Convenience wrapper discarding history.
pub fn grc_bicgstab_quiet(
    a: &SparseMatrixCsr,
    b: &[f64],
    u0: &[f64],
    grc_cfg: &GrcConfig,
    inner_cfg: &BicgstabConfig,
) -> Result<GrcResult, SolverError> {
    let mut inner = BicgstabInner { cfg: *inner_cfg };
    grc_outer(a, b, u0, &mut inner, grc_cfg, &mut NoHistory)
}
