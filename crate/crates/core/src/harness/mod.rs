//! Benchmark runs: build or load a problem, run the requested solvers, and
//! write one convergence CSV per solver plus a text and JSON summary.

mod csv;
mod summary;

pub use self::csv::{emit_csv, read_csv, read_csv_path, write_csv, CSV_HEADER};
pub use self::summary::{summarize, SolverRun, Summary, SummaryLine};

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::bicgstab::{bicgstab, BicgstabConfig, ShadowResidual};
use crate::grc::{grc_bicgstab, AlphaFormula, GrcConfig};
use crate::history::ConvergenceHistory;
use crate::outcome::SolverError;
use crate::problems::{gen_pde1, gen_toeplitz, rhs_all_ones, Pde1Spec, ProblemError, ToeplitzSpec};
use crate::sparse::mm::{mm_read_path, MmError};
use crate::sparse::{norm2, SparseMatrixCsr};

#[derive(Error, Debug)]
pub enum HarnessError {
    #[error("cannot read matrix {path}: {source}")]
    Matrix { path: PathBuf, source: MmError },

    #[error("cannot read right-hand side {path}: {reason}")]
    Rhs { path: PathBuf, reason: String },

    #[error(transparent)]
    Problem(#[from] ProblemError),

    #[error(transparent)]
    Solver(#[from] SolverError),

    #[error("invalid run specification: {0}")]
    InvalidSpec(String),

    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] ::csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("history is empty")]
    EmptyHistory,

    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    MatrixFile(PathBuf),
    Pde1(Pde1Spec),
    Toeplitz(ToeplitzSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub enum RhsMode {
    /// The problem's own right-hand side: the sampled source term for the
    /// PDE problem, `A 1` otherwise.
    Natural,
    /// `b = A 1`.
    Ones,
    /// Whitespace-separated values, optionally as a Matrix Market array file.
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverSelection {
    Bicgstab,
    GrcBicgstab,
    Both,
}

impl SolverSelection {
    fn includes_bicgstab(self) -> bool {
        matches!(self, SolverSelection::Bicgstab | SolverSelection::Both)
    }

    fn includes_grc(self) -> bool {
        matches!(self, SolverSelection::GrcBicgstab | SolverSelection::Both)
    }
}

pub const BICGSTAB_NAME: &str = "bicgstab";
pub const GRC_BICGSTAB_NAME: &str = "grc-bicgstab";

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub problem: ProblemSource,
    pub rhs: RhsMode,
    pub solver: SolverSelection,
    /// Stopping tolerance for both solvers (relative unless `absolute`).
    pub tol: f64,
    /// Inner BiCGSTAB threshold for GRC-BiCGSTAB.
    pub theta: f64,
    pub window: usize,
    pub max_outer: usize,
    /// Iteration cap for every BiCGSTAB invocation. Defaults to `10n` for a
    /// standalone run and `2n` per inner solve.
    pub max_inner: Option<usize>,
    pub shadow: ShadowResidual,
    pub alpha: AlphaFormula,
    /// Interpret `tol` as a bound on `||r||` rather than `||r|| / ||r_0||`.
    pub absolute: bool,
    pub out_dir: PathBuf,
}

impl RunSpec {
    pub fn new(problem: ProblemSource, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            problem,
            rhs: RhsMode::Natural,
            solver: SolverSelection::Both,
            tol: 1e-12,
            theta: 0.5,
            window: 5,
            max_outer: 1000,
            max_inner: None,
            shadow: ShadowResidual::CopyOfR0,
            alpha: AlphaFormula::ResidualMinimizing,
            absolute: false,
            out_dir: out_dir.into(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidSpec(m.into()));
        if !(self.tol > 0.0) {
            return bad("--tol must be positive");
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return bad("--theta must lie in (0, 1)");
        }
        if self.window == 0 {
            return bad("--window must be >= 1");
        }
        if self.max_outer == 0 {
            return bad("--max-outer must be >= 1");
        }
        if self.max_inner == Some(0) {
            return bad("--max-inner must be >= 1");
        }
        Ok(())
    }
}

/// Outcome of [`run`]: per-solver results, the comparison table, and the
/// files written.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub runs: Vec<SolverRun>,
    pub summary: Summary,
    pub csv_paths: Vec<PathBuf>,
    pub summary_paths: Vec<PathBuf>,
}

impl RunReport {
    pub fn all_converged(&self) -> bool {
        self.runs.iter().all(|r| r.outcome.is_converged())
    }

    /// Process exit status: 0 iff every requested solver converged.
    pub fn exit_code(&self) -> i32 {
        exit_code(&self.runs)
    }
}

pub fn exit_code(runs: &[SolverRun]) -> i32 {
    if runs.iter().all(|r| r.outcome.is_converged()) {
        0
    } else {
        1
    }
}

/// Parses a vector file: `%` comment lines are skipped and a leading
/// Matrix Market array size line `n 1` is dropped.
pub fn read_rhs(path: &Path, n: usize) -> Result<Vec<f64>, HarnessError> {
    let err = |reason: String| HarnessError::Rhs {
        path: path.to_path_buf(),
        reason,
    };
    let text = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    let mut tokens: Vec<&str> = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('%'))
        .flat_map(str::split_whitespace)
        .collect();
    if tokens.len() == n + 2 && tokens[0].parse() == Ok(n) && tokens[1] == "1" {
        tokens.drain(..2);
    }
    if tokens.len() != n {
        return Err(err(format!("expected {n} values, found {}", tokens.len())));
    }
    tokens
        .iter()
        .map(|t| t.parse().map_err(|_| err(format!("cannot parse `{t}`"))))
        .collect()
}

/// Builds the operator and right-hand side named by `spec`.
pub fn load_problem(spec: &RunSpec) -> Result<(SparseMatrixCsr, Vec<f64>), HarnessError> {
    let (a, natural) = match &spec.problem {
        ProblemSource::MatrixFile(path) => {
            let a = mm_read_path(path).map_err(|source| HarnessError::Matrix {
                path: path.clone(),
                source,
            })?;
            (a, None)
        }
        ProblemSource::Pde1(p) => {
            let (a, b) = gen_pde1(p)?;
            (a, Some(b))
        }
        ProblemSource::Toeplitz(t) => (gen_toeplitz(t)?, None),
    };
    let b = match (&spec.rhs, natural) {
        (RhsMode::Natural, Some(b)) => b,
        (RhsMode::Natural, None) | (RhsMode::Ones, _) => rhs_all_ones(&a),
        (RhsMode::File(path), _) => read_rhs(path, a.n())?,
    };
    Ok((a, b))
}

fn relative_threshold(spec: &RunSpec, r0_norm: f64) -> f64 {
    if spec.absolute && r0_norm > 0.0 {
        spec.tol / r0_norm
    } else {
        spec.tol
    }
}

fn true_relative_residual(a: &SparseMatrixCsr, b: &[f64], x: &[f64]) -> f64 {
    let ax = a.matvec(x).expect("dimensions checked");
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let b_norm = norm2(b);
    if b_norm > 0.0 {
        norm2(&r) / b_norm
    } else {
        norm2(&r)
    }
}

/// Standalone BiCGSTAB from the zero vector.
pub fn run_bicgstab(
    a: &SparseMatrixCsr,
    b: &[f64],
    spec: &RunSpec,
) -> Result<SolverRun, HarnessError> {
    let n = a.n();
    let threshold = relative_threshold(spec, norm2(b));
    let cfg = BicgstabConfig {
        // an absolute tolerance already met by x0 = 0 still needs a valid theta
        theta: threshold.min(1.0 - f64::EPSILON),
        max_iters: spec.max_inner.unwrap_or((10 * n).max(1)),
        shadow: spec.shadow,
        ..BicgstabConfig::default()
    };
    let start = Instant::now();
    let mut history = ConvergenceHistory::new();
    let res = bicgstab(a, b, &vec![0.0; n], &cfg, &mut history)?;
    let wall_time_s = start.elapsed().as_secs_f64();
    Ok(SolverRun {
        name: BICGSTAB_NAME.into(),
        outcome: res.outcome,
        history,
        matvecs: res.matvecs,
        bicgstab_iterations: res.outcome.iterations,
        outer_iterations: None,
        true_relative_residual: true_relative_residual(a, b, &res.x),
        wall_time_s,
        solution: res.x,
    })
}

/// GRC-BiCGSTAB from the zero vector.
pub fn run_grc_bicgstab(
    a: &SparseMatrixCsr,
    b: &[f64],
    spec: &RunSpec,
) -> Result<SolverRun, HarnessError> {
    let n = a.n();
    let grc_cfg = GrcConfig {
        window: spec.window,
        tol: relative_threshold(spec, norm2(b)),
        max_outer: spec.max_outer,
        alpha_formula: spec.alpha,
        ..GrcConfig::default()
    };
    let inner_cfg = BicgstabConfig {
        theta: spec.theta,
        max_iters: spec.max_inner.unwrap_or((2 * n).max(1)),
        shadow: spec.shadow,
        ..BicgstabConfig::default()
    };
    let start = Instant::now();
    let (res, history) = grc_bicgstab(a, b, &vec![0.0; n], &grc_cfg, &inner_cfg)?;
    let wall_time_s = start.elapsed().as_secs_f64();
    Ok(SolverRun {
        name: GRC_BICGSTAB_NAME.into(),
        outcome: res.outcome,
        history,
        matvecs: res.matvecs,
        bicgstab_iterations: res.total_inner_iterations,
        outer_iterations: Some(res.outcome.iterations),
        true_relative_residual: res.true_relative_residual,
        wall_time_s,
        solution: res.u,
    })
}

/// Runs every requested solver and writes `<solver>.csv`, `summary.txt`
/// and `summary.json` into `spec.out_dir`.
///
/// With [`SolverSelection::Both`] the two solvers run on separate threads.
pub fn run(spec: &RunSpec) -> Result<RunReport, HarnessError> {
    spec.validate()?;
    let (a, b) = load_problem(spec)?;

    let runs: Vec<SolverRun> = match spec.solver {
        SolverSelection::Both => std::thread::scope(|s| {
            let grc = s.spawn(|| run_grc_bicgstab(&a, &b, spec));
            let plain = run_bicgstab(&a, &b, spec);
            let grc = grc.join().expect("solver thread panicked");
            Ok::<_, HarnessError>(vec![plain?, grc?])
        })?,
        sel => {
            let mut runs = Vec::new();
            if sel.includes_bicgstab() {
                runs.push(run_bicgstab(&a, &b, spec)?);
            }
            if sel.includes_grc() {
                runs.push(run_grc_bicgstab(&a, &b, spec)?);
            }
            runs
        }
    };

    fs::create_dir_all(&spec.out_dir).map_err(|source| HarnessError::Output {
        path: spec.out_dir.clone(),
        source,
    })?;
    let mut csv_paths = Vec::new();
    for r in &runs {
        let path = spec.out_dir.join(format!("{}.csv", r.name));
        emit_csv(&r.history, &path)?;
        csv_paths.push(path);
    }

    let summary = summarize(&runs);
    let txt = spec.out_dir.join("summary.txt");
    let json = spec.out_dir.join("summary.json");
    let write = |path: &PathBuf, contents: String| {
        fs::write(path, contents).map_err(|source| HarnessError::Output {
            path: path.clone(),
            source,
        })
    };
    write(&txt, summary.to_text())?;
    write(&json, summary.to_json()?)?;

    Ok(RunReport {
        runs,
        summary,
        csv_paths,
        summary_paths: vec![txt, json],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outcome::{BreakdownReason, OutcomeTag, SolverOutcome};

    fn pde1_spec(nx: usize, out: &Path) -> RunSpec {
        RunSpec::new(ProblemSource::Pde1(Pde1Spec::new(nx)), out)
    }

    #[test]
    fn one_by_one_pde_converges_in_one_iteration() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = pde1_spec(1, dir.path());
        spec.solver = SolverSelection::Bicgstab;
        let report = run(&spec).unwrap();
        assert_eq!(report.runs.len(), 1);
        assert!(report.runs[0].outcome.is_converged());
        assert_eq!(report.runs[0].outcome.iterations, 1);
        assert_eq!(report.exit_code(), 0);
        assert!(dir.path().join("bicgstab.csv").exists());
        assert!(dir.path().join("summary.json").exists());
    }

    #[test]
    fn both_solvers_write_two_csvs() {
        let dir = tempfile::tempdir().unwrap();
        let report = run(&pde1_spec(3, dir.path())).unwrap();
        assert_eq!(report.csv_paths.len(), 2);
        for (r, path) in report.runs.iter().zip(&report.csv_paths) {
            let h = read_csv_path(path).unwrap();
            assert_eq!(h, r.history);
            assert!(h.counters_monotone());
            assert_eq!(
                h.last().unwrap().relative_residual,
                r.outcome.final_relative_residual
            );
        }
    }

    #[test]
    fn missing_matrix_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let spec = RunSpec::new(
            ProblemSource::MatrixFile(dir.path().join("nope.mtx")),
            dir.path(),
        );
        assert!(matches!(run(&spec), Err(HarnessError::Matrix { .. })));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = pde1_spec(2, dir.path());
        spec.theta = 1.0;
        assert!(matches!(run(&spec), Err(HarnessError::InvalidSpec(_))));
        let mut spec = pde1_spec(2, dir.path());
        spec.window = 0;
        assert!(matches!(run(&spec), Err(HarnessError::InvalidSpec(_))));
    }

    #[test]
    fn rhs_file_formats() {
        let dir = tempfile::tempdir().unwrap();
        let plain = dir.path().join("b.txt");
        fs::write(&plain, "1 2\n3\n").unwrap();
        assert_eq!(read_rhs(&plain, 3).unwrap(), vec![1.0, 2.0, 3.0]);
        let mm = dir.path().join("b.mtx");
        fs::write(
            &mm,
            "%%MatrixMarket matrix array real general\n% c\n3 1\n1\n2\n3\n",
        )
        .unwrap();
        assert_eq!(read_rhs(&mm, 3).unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(read_rhs(&plain, 4).is_err());
    }

    #[test]
    fn absolute_tolerance_rescales() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = pde1_spec(2, dir.path());
        spec.absolute = true;
        spec.tol = 1e-6;
        assert_eq!(relative_threshold(&spec, 100.0), 1e-8);
        spec.absolute = false;
        assert_eq!(relative_threshold(&spec, 100.0), 1e-6);
    }

    #[test]
    fn exit_code_across_outcome_combinations() {
        let tags = [
            OutcomeTag::Converged,
            OutcomeTag::Breakdown {
                reason: BreakdownReason::RhoZero,
                iteration: 3,
            },
            OutcomeTag::Stagnation,
            OutcomeTag::MaxIterations,
        ];
        let mk = |tag| SolverRun {
            name: "x".into(),
            outcome: SolverOutcome {
                tag,
                iterations: 1,
                final_relative_residual: 0.0,
            },
            history: ConvergenceHistory::new(),
            matvecs: 0,
            bicgstab_iterations: 0,
            outer_iterations: None,
            true_relative_residual: 0.0,
            wall_time_s: 0.0,
            solution: vec![],
        };
        for &t1 in &tags {
            assert_eq!(exit_code(&[mk(t1)]), i32::from(t1 != OutcomeTag::Converged));
            for &t2 in &tags {
                let expected =
                    i32::from(!(t1 == OutcomeTag::Converged && t2 == OutcomeTag::Converged));
                assert_eq!(exit_code(&[mk(t1), mk(t2)]), expected);
            }
        }
    }
}
