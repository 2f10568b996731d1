//! Unpreconditioned BiCGSTAB with explicit breakdown detection.
//!
//! The loop follows the classical recurrence with `p_0 = r_0` and, by
//! default, shadow residual `r0* = r_0`:
//!
//! ```text
//! alpha = (r_j, r0*) / (A p_j, r0*)
//! s     = r_j - alpha A p_j
//! omega = (A s, s) / (A s, A s)
//! x    += alpha p_j + omega s
//! r     = s - omega A s
//! beta  = (r_{j+1}, r0*) / (r_j, r0*) * alpha / omega
//! p     = r + beta (p - omega A p)
//! ```
//!
//! Convergence is the strict test `||r|| / ||r_0|| < theta`, applied to the
//! full-step residual and also to `s` so that `s = 0` exits before the
//! `omega` division.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::history::{HistoryRow, HistorySink, Phase};
use crate::outcome::{BreakdownReason, OutcomeTag, SolverError, SolverOutcome};
use crate::sparse::{check_len, dot, norm2, SparseMatrixCsr};

/// Choice of the shadow residual `r0*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShadowResidual {
    CopyOfR0,
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BicgstabConfig {
    /// Relative residual threshold; iteration stops once `||r||/||r_0|| < theta`.
    pub theta: f64,
    pub max_iters: usize,
    /// Relative threshold used by the `rho` and `alpha` breakdown tests.
    pub breakdown_eps: f64,
    pub shadow: ShadowResidual,
}

impl Default for BicgstabConfig {
    fn default() -> Self {
        Self {
            theta: 1e-12,
            max_iters: 10_000,
            breakdown_eps: 1e-14,
            shadow: ShadowResidual::CopyOfR0,
        }
    }
}

impl BicgstabConfig {
    /// Configuration used for the inner solve of GRC-BiCGSTAB: halve the
    /// residual, at most `2n` iterations.
    pub fn inner(n: usize) -> Self {
        Self {
            theta: 0.5,
            max_iters: (2 * n).max(1),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(SolverError::InvalidConfig(format!(
                "theta must lie in (0, 1), got {}",
                self.theta
            )));
        }
        if self.max_iters == 0 {
            return Err(SolverError::InvalidConfig("max_iters must be >= 1".into()));
        }
        if !(self.breakdown_eps > 0.0) {
            return Err(SolverError::InvalidConfig(
                "breakdown_eps must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Working vectors and scalars of one BiCGSTAB run.
#[derive(Debug, Clone)]
pub struct BicgstabState {
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub p: Vec<f64>,
    pub s: Vec<f64>,
    pub r0star: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
    pub j: usize,
}

#[derive(Debug, Clone)]
pub struct BicgstabResult {
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    pub outcome: SolverOutcome,
    /// Operator applications performed, including the initial residual.
    pub matvecs: usize,
}

/// Half-step exit test: `s_norm / r0_norm < theta`.
#[inline]
pub fn bicgstab_step_check(s_norm: f64, r0_norm: f64, theta: f64) -> bool {
    s_norm / r0_norm < theta
}

fn shadow_vector(mode: ShadowResidual, r0: &[f64]) -> Vec<f64> {
    match mode {
        ShadowResidual::CopyOfR0 => r0.to_vec(),
        ShadowResidual::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..r0.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()
        }
    }
}

/// Solves `A x = b` from `x0`, appending one history row for the initial
/// residual and one per completed iteration.
///
/// The returned `x` and `r` are always the last iterate pair whose recursive
/// residual was finite.
pub fn bicgstab<S>(
    a: &SparseMatrixCsr,
    b: &[f64],
    x0: &[f64],
    cfg: &BicgstabConfig,
    history: &mut S,
) -> Result<BicgstabResult, SolverError>
where
    S: HistorySink + ?Sized,
{
    let n = a.n();
    check_len(n, b.len())?;
    check_len(n, x0.len())?;
    cfg.validate()?;

    let mut matvecs = 0;
    let mut r = if x0.iter().all(|&v| v == 0.0) {
        b.to_vec()
    } else {
        matvecs += 1;
        let ax = a.matvec(x0)?;
        b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
    };
    let r0_norm = norm2(&r);
    let rel = |norm: f64| if r0_norm > 0.0 { norm / r0_norm } else { 0.0 };
    let row = |iters: usize, matvecs: usize, norm: f64| HistoryRow {
        cumulative_inner_iters: iters,
        cumulative_matvecs: matvecs,
        outer_iter: 0,
        phase: Phase::Standalone,
        residual_norm: norm,
        relative_residual: rel(norm),
    };
    history.record(row(0, matvecs, r0_norm));

    let finish = |x: Vec<f64>, r: Vec<f64>, tag: OutcomeTag, iterations: usize, matvecs| {
        let final_relative_residual = rel(norm2(&r));
        Ok(BicgstabResult {
            x,
            r,
            outcome: SolverOutcome {
                tag,
                iterations,
                final_relative_residual,
            },
            matvecs,
        })
    };
    let breakdown = |reason, iteration| OutcomeTag::Breakdown { reason, iteration };

    if r0_norm == 0.0 {
        return finish(x0.to_vec(), r, OutcomeTag::Converged, 0, matvecs);
    }
    if !r0_norm.is_finite() {
        return finish(
            x0.to_vec(),
            r,
            breakdown(BreakdownReason::Nonfinite, 0),
            0,
            matvecs,
        );
    }

    let r0star = shadow_vector(cfg.shadow, &r);
    let r0star_norm = norm2(&r0star);
    let mut st = BicgstabState {
        x: x0.to_vec(),
        p: r.clone(),
        s: vec![0.0; n],
        r: std::mem::take(&mut r),
        r0star,
        alpha: 0.0,
        beta: 0.0,
        omega: 0.0,
        j: 0,
    };
    let mut ap = vec![0.0; n];
    let mut as_ = vec![0.0; n];
    let mut r_next = vec![0.0; n];
    let mut r_norm = r0_norm;
    let mut rho = dot(&st.r, &st.r0star)?;
    let eps = cfg.breakdown_eps;

    while st.j < cfg.max_iters {
        let j = st.j;
        if !rho.is_finite() {
            return finish(
                st.x,
                st.r,
                breakdown(BreakdownReason::Nonfinite, j),
                j,
                matvecs,
            );
        }
        if rho.abs() <= eps * r_norm * r0star_norm {
            return finish(
                st.x,
                st.r,
                breakdown(BreakdownReason::RhoZero, j),
                j,
                matvecs,
            );
        }

        a.matvec_into(&st.p, &mut ap)?;
        matvecs += 1;
        let sigma = dot(&ap, &st.r0star)?;
        if !sigma.is_finite() {
            return finish(
                st.x,
                st.r,
                breakdown(BreakdownReason::Nonfinite, j),
                j,
                matvecs,
            );
        }
        if sigma.abs() <= eps * norm2(&ap) * r0star_norm {
            return finish(
                st.x,
                st.r,
                breakdown(BreakdownReason::AlphaDenominator, j),
                j,
                matvecs,
            );
        }
        st.alpha = rho / sigma;
        if !st.alpha.is_finite() {
            return finish(
                st.x,
                st.r,
                breakdown(BreakdownReason::Nonfinite, j),
                j,
                matvecs,
            );
        }

        for ((si, ri), api) in st.s.iter_mut().zip(&st.r).zip(&ap) {
            *si = ri - st.alpha * api;
        }
        let s_norm = norm2(&st.s);
        if !s_norm.is_finite() {
            return finish(
                st.x,
                st.r,
                breakdown(BreakdownReason::Nonfinite, j),
                j,
                matvecs,
            );
        }
        if bicgstab_step_check(s_norm, r0_norm, cfg.theta) {
            for (xi, pi) in st.x.iter_mut().zip(&st.p) {
                *xi += st.alpha * pi;
            }
            std::mem::swap(&mut st.r, &mut st.s);
            st.j += 1;
            history.record(row(st.j, matvecs, s_norm));
            return finish(st.x, st.r, OutcomeTag::Converged, st.j, matvecs);
        }

        a.matvec_into(&st.s, &mut as_)?;
        matvecs += 1;
        let tt = dot(&as_, &as_)?;
        if tt == 0.0 {
            return finish(
                st.x,
                st.r,
                breakdown(BreakdownReason::OmegaDenominator, j),
                j,
                matvecs,
            );
        }
        st.omega = dot(&as_, &st.s)? / tt;
        if !st.omega.is_finite() {
            return finish(
                st.x,
                st.r,
                breakdown(BreakdownReason::Nonfinite, j),
                j,
                matvecs,
            );
        }

        for ((rn, si), ti) in r_next.iter_mut().zip(&st.s).zip(&as_) {
            *rn = si - st.omega * ti;
        }
        let next_norm = norm2(&r_next);
        if !next_norm.is_finite() {
            return finish(
                st.x,
                st.r,
                breakdown(BreakdownReason::Nonfinite, j),
                j,
                matvecs,
            );
        }
        for ((xi, pi), si) in st.x.iter_mut().zip(&st.p).zip(&st.s) {
            *xi += st.alpha * pi + st.omega * si;
        }
        std::mem::swap(&mut st.r, &mut r_next);
        r_norm = next_norm;
        st.j += 1;
        history.record(row(st.j, matvecs, r_norm));

        if bicgstab_step_check(r_norm, r0_norm, cfg.theta) {
            return finish(st.x, st.r, OutcomeTag::Converged, st.j, matvecs);
        }

        let rho_next = dot(&st.r, &st.r0star)?;
        st.beta = (rho_next / rho) * (st.alpha / st.omega);
        if !st.beta.is_finite() {
            let j = st.j;
            return finish(
                st.x,
                st.r,
                breakdown(BreakdownReason::Nonfinite, j),
                j,
                matvecs,
            );
        }
        for ((pi, ri), api) in st.p.iter_mut().zip(&st.r).zip(&ap) {
            *pi = ri + st.beta * (*pi - st.omega * api);
        }
        rho = rho_next;
    }

    let j = st.j;
    finish(st.x, st.r, OutcomeTag::MaxIterations, j, matvecs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::{ConvergenceHistory, NoHistory};
    use crate::sparse::TripletList;

    fn scaled_identity(n: usize, c: f64) -> SparseMatrixCsr {
        let mut t = TripletList::new(n);
        for i in 0..n {
            t.push(i, i, c);
        }
        SparseMatrixCsr::from_triplets(&t).unwrap()
    }

    #[test]
    fn step_check_examples() {
        assert!(bicgstab_step_check(0.0, 3.0, 1e-12));
        assert!(bicgstab_step_check(0.4, 1.0, 0.5));
        assert!(!bicgstab_step_check(0.5, 1.0, 0.5));
    }

    #[test]
    fn identity_converges_in_one_iteration() {
        let a = SparseMatrixCsr::identity(5);
        let b = [1.0, -2.0, 3.0, 0.5, 7.0];
        let res = bicgstab(
            &a,
            &b,
            &[0.0; 5],
            &BicgstabConfig::default(),
            &mut NoHistory,
        )
        .unwrap();
        assert_eq!(res.outcome.tag, OutcomeTag::Converged);
        assert_eq!(res.outcome.iterations, 1);
        assert_eq!(res.x, b.to_vec());
    }

    #[test]
    fn scaled_identity_takes_half_step_exit() {
        let a = scaled_identity(4, 2.0);
        let mut hist = ConvergenceHistory::new();
        let res = bicgstab(
            &a,
            &[1.0; 4],
            &[0.0; 4],
            &BicgstabConfig::default(),
            &mut hist,
        )
        .unwrap();
        assert_eq!(res.outcome.tag, OutcomeTag::Converged);
        assert_eq!(res.outcome.iterations, 1);
        assert_eq!(res.x, vec![0.5; 4]);
        assert_eq!(res.r, vec![0.0; 4]);
        // initial residual, then the half step; no A s product was needed
        assert_eq!(hist.len(), 2);
        assert_eq!(res.matvecs, 1);
    }

    #[test]
    fn exact_start_returns_immediately() {
        let a = scaled_identity(3, 4.0);
        let mut hist = ConvergenceHistory::new();
        let res = bicgstab(
            &a,
            &[4.0, 8.0, 12.0],
            &[1.0, 2.0, 3.0],
            &BicgstabConfig::default(),
            &mut hist,
        )
        .unwrap();
        assert_eq!(res.outcome.tag, OutcomeTag::Converged);
        assert_eq!(res.outcome.iterations, 0);
        assert_eq!(res.x, vec![1.0, 2.0, 3.0]);
        assert_eq!(hist.len(), 1);
    }

    #[test]
    fn detects_alpha_breakdown_on_rotation() {
        // a rotation: (A r, r) = 0 for every r, so with r0* = r0 the first
        // alpha denominator vanishes
        let a = SparseMatrixCsr::from_dense(&[vec![0.0, -1.0], vec![1.0, 0.0]]).unwrap();
        let res = bicgstab(
            &a,
            &[1.0, 0.0],
            &[0.0, 0.0],
            &BicgstabConfig::default(),
            &mut NoHistory,
        )
        .unwrap();
        assert_eq!(
            res.outcome.tag,
            OutcomeTag::Breakdown {
                reason: BreakdownReason::AlphaDenominator,
                iteration: 0
            }
        );
        assert_eq!(res.x, vec![0.0, 0.0]);
        assert_eq!(res.r, vec![1.0, 0.0]);
        assert_eq!(res.outcome.final_relative_residual, 1.0);
    }

    #[test]
    fn reports_max_iterations() {
        let n = 30;
        let mut t = TripletList::new(n);
        for i in 0..n {
            t.push(i, i, 2.0 + i as f64);
            if i + 1 < n {
                t.push(i, i + 1, -1.0);
                t.push(i + 1, i, -1.5);
            }
        }
        let a = SparseMatrixCsr::from_triplets(&t).unwrap();
        let cfg = BicgstabConfig {
            max_iters: 2,
            ..BicgstabConfig::default()
        };
        let mut hist = ConvergenceHistory::new();
        let res = bicgstab(&a, &vec![1.0; n], &vec![0.0; n], &cfg, &mut hist).unwrap();
        assert_eq!(res.outcome.tag, OutcomeTag::MaxIterations);
        assert_eq!(res.outcome.iterations, 2);
        assert_eq!(hist.len(), 3);
        assert_eq!(
            hist.last().unwrap().relative_residual,
            res.outcome.final_relative_residual
        );
    }

    #[test]
    fn rejects_bad_input() {
        let a = SparseMatrixCsr::identity(3);
        assert!(matches!(
            bicgstab(
                &a,
                &[1.0; 2],
                &[0.0; 3],
                &BicgstabConfig::default(),
                &mut NoHistory
            ),
            Err(SolverError::Dimension(_))
        ));
        let cfg = BicgstabConfig {
            theta: 1.5,
            ..BicgstabConfig::default()
        };
        assert!(matches!(
            bicgstab(&a, &[1.0; 3], &[0.0; 3], &cfg, &mut NoHistory),
            Err(SolverError::InvalidConfig(_))
        ));
        let cfg = BicgstabConfig {
            max_iters: 0,
            ..BicgstabConfig::default()
        };
        assert!(bicgstab(&a, &[1.0; 3], &[0.0; 3], &cfg, &mut NoHistory).is_err());
    }

    #[test]
    fn random_shadow_is_seeded() {
        let r0 = vec![1.0; 16];
        let a = shadow_vector(ShadowResidual::Random { seed: 3 }, &r0);
        let b = shadow_vector(ShadowResidual::Random { seed: 3 }, &r0);
        let c = shadow_vector(ShadowResidual::Random { seed: 4 }, &r0);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(shadow_vector(ShadowResidual::CopyOfR0, &r0), r0);
    }
}
