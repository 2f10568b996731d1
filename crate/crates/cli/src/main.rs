//! `grc-bench`: compare BiCGSTAB and GRC-BiCGSTAB on a generated or
//! Matrix Market problem and write plot-ready convergence histories.
//!
//! Exit status: 0 when every requested solver converged, 1 when at least
//! one did not, 2 on usage errors, 3 when the run itself failed (for
//! example an unreadable matrix file).

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Parser, ValueEnum};

use grc_krylov::harness::{self, ProblemSource, RhsMode, RunSpec, SolverSelection};
use grc_krylov::problems::{Pde1Spec, ToeplitzSpec};
use grc_krylov::{AlphaFormula, ShadowResidual};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProblemKind {
    Pde1,
    Toeplitz,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SolverArg {
    Bicgstab,
    GrcBicgstab,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ShadowArg {
    R0,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlphaArg {
    Projection,
    Minres,
}

#[derive(Debug, Parser)]
#[command(name = "grc-bench", version, about)]
#[command(group(ArgGroup::new("source").required(true).args(["matrix", "problem"])))]
struct Args {
    /// Matrix Market coordinate file.
    #[arg(long, value_name = "PATH")]
    matrix: Option<PathBuf>,

    /// Generated test problem.
    #[arg(long, value_enum)]
    problem: Option<ProblemKind>,

    /// Interior grid points per axis for pde1.
    #[arg(long, default_value_t = 5)]
    nx: usize,

    /// Convection coefficient for pde1.
    #[arg(long, default_value_t = 1000.0, allow_negative_numbers = true)]
    conv: f64,

    /// Dimension for toeplitz.
    #[arg(long)]
    n: Option<usize>,

    /// Toeplitz stencil as `offset:value,...`, e.g. `0:2,-1:-1,1:-1`.
    #[arg(long, allow_hyphen_values = true)]
    stencil: Option<String>,

    /// `ones` for b = A*1, or a path to a vector file. Defaults to the
    /// problem's own right-hand side (the source term for pde1, ones otherwise).
    #[arg(long, value_name = "ones|PATH")]
    rhs: Option<String>,

    #[arg(long, value_enum, default_value = "both")]
    solver: SolverArg,

    #[arg(long, default_value_t = 1e-12)]
    tol: f64,

    /// Inner BiCGSTAB relative residual target for GRC-BiCGSTAB.
    #[arg(long, default_value_t = 0.5)]
    theta: f64,

    /// GRC window parameter j.
    #[arg(long, default_value_t = 5)]
    window: usize,

    #[arg(long, default_value_t = 1000)]
    max_outer: usize,

    /// Cap on every BiCGSTAB run (default 10n standalone, 2n per inner solve).
    #[arg(long)]
    max_inner: Option<usize>,

    #[arg(long, value_enum, default_value = "r0")]
    shadow: ShadowArg,

    #[arg(long, value_enum, default_value = "minres")]
    alpha: AlphaArg,

    /// Treat --tol as a bound on ||r|| instead of ||r||/||r0||.
    #[arg(long)]
    absolute: bool,

    #[arg(long, default_value = "grc-bench-out")]
    out: PathBuf,

    /// Seed for --shadow random.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_stencil(text: &str) -> Result<Vec<(i64, f64)>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|entry| {
            let (off, val) = entry
                .split_once(':')
                .with_context(|| format!("stencil entry `{entry}` is not `offset:value`"))?;
            let off = off
                .trim()
                .parse()
                .with_context(|| format!("bad stencil offset `{off}`"))?;
            let val = val
                .trim()
                .parse()
                .with_context(|| format!("bad stencil value `{val}`"))?;
            Ok((off, val))
        })
        .collect()
}

fn build_spec(args: &Args) -> Result<RunSpec> {
    let problem = match (&args.matrix, args.problem) {
        (Some(path), None) => ProblemSource::MatrixFile(path.clone()),
        (None, Some(ProblemKind::Pde1)) => ProblemSource::Pde1(Pde1Spec {
            nx: args.nx,
            c: args.conv,
        }),
        (None, Some(ProblemKind::Toeplitz)) => {
            let Some(n) = args.n else {
                bail!("--problem toeplitz requires --n");
            };
            let Some(stencil) = &args.stencil else {
                bail!("--problem toeplitz requires --stencil");
            };
            ProblemSource::Toeplitz(ToeplitzSpec {
                n,
                stencil: parse_stencil(stencil)?,
            })
        }
        _ => bail!("exactly one of --matrix and --problem is required"),
    };
    if args.stencil.is_some() && !matches!(problem, ProblemSource::Toeplitz(_)) {
        bail!("--stencil only applies to --problem toeplitz");
    }

    let mut spec = RunSpec::new(problem, &args.out);
    spec.rhs = match args.rhs.as_deref() {
        None => RhsMode::Natural,
        Some("ones") => RhsMode::Ones,
        Some(path) => RhsMode::File(PathBuf::from(path)),
    };
    spec.solver = match args.solver {
        SolverArg::Bicgstab => SolverSelection::Bicgstab,
        SolverArg::GrcBicgstab => SolverSelection::GrcBicgstab,
        SolverArg::Both => SolverSelection::Both,
    };
    spec.tol = args.tol;
    spec.theta = args.theta;
    spec.window = args.window;
    spec.max_outer = args.max_outer;
    spec.max_inner = args.max_inner;
    spec.shadow = match args.shadow {
        ShadowArg::R0 => ShadowResidual::CopyOfR0,
        ShadowArg::Random => ShadowResidual::Random { seed: args.seed },
    };
    spec.alpha = match args.alpha {
        AlphaArg::Projection => AlphaFormula::PsiProjection,
        AlphaArg::Minres => AlphaFormula::ResidualMinimizing,
    };
    spec.absolute = args.absolute;
    spec.validate()?;
    Ok(spec)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let spec = match build_spec(&args) {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match harness::run(&spec) {
        Ok(report) => {
            print!("{}", report.summary.to_text());
            for path in report.csv_paths.iter().chain(&report.summary_paths) {
                eprintln!("wrote {}", path.display());
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
