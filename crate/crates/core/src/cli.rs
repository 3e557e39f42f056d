//! Command-line front end: `solve`, `convergence` and `verify`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid configuration,
//! 3 solver failure. Reports go to stdout (or `--output`), diagnostics to
//! stderr.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    error_norms, render_report, ConvergenceReport, ReportFormat, DEFAULT_LINF_SAMPLES,
};
use crate::assembly::DEFAULT_QUAD_POINTS;
use crate::error::Error;
use crate::mesh::Mesh;
use crate::problems::{by_name, verify_continuous_kkt, ProblemSpec};
use crate::qp::{DEFAULT_PDAS_C, DEFAULT_PDAS_MAX_ITER};
use crate::solver::{solve, solve_full, SolverOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Largest accepted level `k` (mesh with `2^k` elements, `1 + 2^k` nodes).
pub const MAX_LEVEL: u32 = 20;

const KKT_SAMPLES: usize = 1000;

#[derive(Debug, Parser)]
#[command(
    name = "hermite-ocp",
    version,
    about = "Cubic Hermite FEM for 1D optimal control with derivative constraints"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve on one mesh and write (x, y_h, y_h', y_h'', u_h) samples as CSV.
    Solve(CommonArgs),
    /// Solve on a sequence of meshes and report errors and observed rates.
    Convergence(CommonArgs),
    /// Check the optimality conditions of the exact solution and, with
    /// --elements, of the discrete solution.
    Verify(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Built-in problem name (paper, unconstrained-smoke).
    #[arg(long, default_value = "paper")]
    pub problem: String,
    /// Element counts (comma separated).
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..))]
    pub elements: Vec<u64>,
    /// Levels k giving 2^k elements (1 + 2^k nodes), e.g. "0..9" or "2,3,5".
    #[arg(long)]
    pub levels: Option<String>,
    /// Report format: md or csv.
    #[arg(long, default_value = "md")]
    pub format: String,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Gauss points per element used in assembly.
    #[arg(long, default_value_t = DEFAULT_QUAD_POINTS)]
    pub quad_points: usize,
    /// Iteration cap of the active set solver.
    #[arg(long, default_value_t = DEFAULT_PDAS_MAX_ITER)]
    pub pdas_max_iter: usize,
    /// Sample points per element in `solve` output.
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    /// Overrides the multiplier λ of the exact solution (testing aid).
    #[arg(long, hide = true)]
    pub debug_lambda: Option<f64>,
}

/// Validated settings for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    /// Element counts, ascending and distinct.
    pub element_counts: Vec<usize>,
    pub output: Option<PathBuf>,
    pub format: ReportFormat,
    pub solver: SolverOptions,
    pub samples: usize,
    pub linf_samples: usize,
}

/// Parses `"0..3,5"` into `[0, 1, 2, 3, 5]` (ranges inclusive).
pub fn parse_levels(text: &str) -> Result<Vec<u32>, Error> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || Error::invalid(format!("bad level spec '{part}'"));
        if let Some((lo, hi)) = part.split_once("..") {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
            let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
            if lo > hi {
                return Err(bad());
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("no levels given"));
    }
    if let Some(k) = out.iter().find(|&&k| k > MAX_LEVEL) {
        return Err(Error::invalid(format!("level {k} exceeds {MAX_LEVEL}")));
    }
    Ok(out)
}

impl RunConfig {
    pub fn from_args(args: &CommonArgs, default_levels: Option<&str>) -> Result<Self, Error> {
        let mut problem = by_name(&args.problem)?;
        if let Some(lambda) = args.debug_lambda {
            problem
                .exact
                .as_mut()
                .ok_or(Error::MissingExactSolution)?
                .lambda = lambda;
        }
        let mut counts: Vec<usize> = args.elements.iter().map(|&n| n as usize).collect();
        let levels = match (&args.levels, default_levels) {
            (Some(text), _) => parse_levels(text)?,
            (None, Some(text)) if counts.is_empty() => parse_levels(text)?,
            _ => Vec::new(),
        };
        counts.extend(levels.iter().map(|&k| 1usize << k));
        if counts.contains(&0) {
            return Err(Error::invalid("element counts must be at least 1"));
        }
        let total = counts.len();
        counts.sort_unstable();
        counts.dedup();
        if counts.len() != total {
            return Err(Error::invalid("duplicate mesh levels"));
        }
        if args.quad_points == 0 || args.quad_points > crate::quadrature::MAX_GAUSS_POINTS {
            return Err(Error::invalid(format!(
                "--quad-points {} unsupported",
                args.quad_points
            )));
        }
        if args.pdas_max_iter == 0 {
            return Err(Error::invalid("--pdas-max-iter must be positive"));
        }
        Ok(RunConfig {
            problem,
            element_counts: counts,
            output: args.output.clone(),
            format: args.format.parse()?,
            solver: SolverOptions {
                quad_points: args.quad_points,
                pdas_c: DEFAULT_PDAS_C,
                pdas_max_iter: args.pdas_max_iter,
            },
            samples: args.samples.max(1),
            linf_samples: DEFAULT_LINF_SAMPLES,
        })
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::MissingExactSolution => EXIT_CONFIG,
        Error::NotConverged { .. } | Error::NotPositiveDefinite { .. } => EXIT_SOLVER,
    }
}

fn fail(err: &Error, stderr: &mut dyn Write) -> i32 {
    let _ = writeln!(stderr, "error: {err}");
    exit_code(err)
}

/// Writes `text` to the configured output file or to `stdout`.
fn emit(config: &RunConfig, text: &str, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match &config.output {
        Some(path) => File::create(path).and_then(|mut f| f.write_all(text.as_bytes())),
        None => stdout.write_all(text.as_bytes()),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot write output: {e}");
            EXIT_CONFIG
        }
    }
}

/// Solves one mesh; CSV columns `x,y_h,dy_h,d2y_h,u_h` with `samples`
/// points per element plus the right endpoint.
pub fn cmd_solve(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let n = match config.element_counts.as_slice() {
        [n] => *n,
        _ => {
            return fail(
                &Error::invalid("solve needs exactly one mesh (--elements N or --levels k)"),
                stderr,
            )
        }
    };
    let mesh = match Mesh::uniform(n) {
        Ok(m) => m,
        Err(e) => return fail(&e, stderr),
    };
    let sol = match solve(&config.problem, &mesh, &config.solver) {
        Ok(s) => s,
        Err(e) => return fail(&e, stderr),
    };
    let mut csv = String::from("x,y_h,dy_h,d2y_h,u_h\n");
    for e in 0..n {
        let (a, b) = mesh.element(e);
        let last = if e + 1 == n {
            config.samples
        } else {
            config.samples - 1
        };
        for j in 0..=last {
            let x = a + (b - a) * j as f64 / config.samples as f64;
            let v: Vec<f64> = (0..3).map(|d| sol.evaluate_on(e, x, d)).collect();
            let u = -(v[2] + config.problem.f.eval(x));
            csv.push_str(&format!(
                "{x:.16e},{:.16e},{:.16e},{:.16e},{u:.16e}\n",
                v[0], v[1], v[2]
            ));
        }
    }
    let mut summary = String::new();
    summary.push_str(&format!(
        "problem {} elements {} pdas iterations {}\n",
        config.problem.name, n, sol.info.iterations
    ));
    if let Some(k) = sol.info.kkt {
        summary.push_str(&format!(
            "kkt stationarity {:e} primal_violation {:e} min_multiplier {:e} complementarity {:e}\n",
            k.stationarity, k.primal_violation, k.min_multiplier, k.complementarity
        ));
    }
    let active: Vec<String> = sol
        .info
        .active_nodes
        .iter()
        .map(|i| i.to_string())
        .collect();
    summary.push_str(&format!("active nodes [{}]\n", active.join(", ")));

    let code = emit(config, &csv, stdout, stderr);
    if code != EXIT_OK {
        return code;
    }
    // with CSV on stdout the summary is a diagnostic
    let sink: &mut dyn Write = if config.output.is_some() {
        stdout
    } else {
        stderr
    };
    let _ = sink.write_all(summary.as_bytes());
    EXIT_OK
}

/// Runs every level and emits the error table with observed rates.
pub fn cmd_convergence(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    if config.element_counts.len() < 2 {
        return fail(
            &Error::invalid("convergence needs at least two levels"),
            stderr,
        );
    }
    let mut levels = Vec::with_capacity(config.element_counts.len());
    for &n in &config.element_counts {
        let result = Mesh::uniform(n)
            .and_then(|mesh| solve(&config.problem, &mesh, &config.solver))
            .and_then(|sol| error_norms(&sol, &config.problem, config.linf_samples));
        match result {
            Ok(r) => levels.push(r),
            Err(e) => return fail(&e, stderr),
        }
    }
    let report = match ConvergenceReport::from_levels(levels) {
        Ok(r) => r,
        Err(e) => return fail(&e, stderr),
    };
    emit(
        config,
        &render_report(&report, config.format),
        stdout,
        stderr,
    )
}

/// Prints one pass/fail line per condition; exit 0 iff all pass.
pub fn cmd_verify(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let mut lines = String::new();
    let mut all_pass = true;
    let mut line = |ok: bool, text: String| {
        all_pass &= ok;
        lines.push_str(&format!("[{}] {text}\n", if ok { "PASS" } else { "FAIL" }));
    };
    if config.problem.exact.is_some() {
        match verify_continuous_kkt(&config.problem, KKT_SAMPLES) {
            Ok(report) => {
                for c in &report.checks {
                    line(
                        c.passed,
                        format!(
                            "continuous: {} = {:e} (tol {:e})",
                            c.name, c.value, c.tolerance
                        ),
                    );
                }
            }
            Err(e) => return fail(&e, stderr),
        }
    } else if config.element_counts.is_empty() {
        return fail(&Error::MissingExactSolution, stderr);
    }
    for &n in &config.element_counts {
        let out = match Mesh::uniform(n)
            .and_then(|mesh| solve_full(&config.problem, &mesh, &config.solver))
        {
            Ok(o) => o,
            Err(e) => return fail(&e, stderr),
        };
        let k = out.solution.info.kkt.expect("solver attaches residuals");
        line(
            k.stationarity <= 1e-10,
            format!(
                "discrete n={n}: stationarity = {:e} (tol 1e-10)",
                k.stationarity
            ),
        );
        line(
            k.primal_violation <= 1e-10,
            format!(
                "discrete n={n}: primal violation = {:e} (tol 1e-10)",
                k.primal_violation
            ),
        );
        line(
            k.min_multiplier >= -1e-12,
            format!(
                "discrete n={n}: min multiplier = {:e} (tol -1e-12)",
                k.min_multiplier
            ),
        );
        line(
            k.complementarity <= 1e-10,
            format!(
                "discrete n={n}: complementarity = {:e} (tol 1e-10)",
                k.complementarity
            ),
        );
    }
    let code = emit(config, &lines, stdout, stderr);
    if code != EXIT_OK {
        return code;
    }
    if all_pass {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}

/// Parses `args` and runs the chosen subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (args, default_levels) = match &cli.command {
        Command::Solve(a) | Command::Verify(a) => (a, None),
        Command::Convergence(a) => (a, Some("0..9")),
    };
    let config = match RunConfig::from_args(args, default_levels) {
        Ok(c) => c,
        Err(e) => return fail(&e, stderr),
    };
    match cli.command {
        Command::Solve(_) => cmd_solve(&config, stdout, stderr),
        Command::Convergence(_) => cmd_convergence(&config, stdout, stderr),
        Command::Verify(_) => cmd_verify(&config, stdout, stderr),
    }
}

/// Entry point used by the binary.
pub fn main_with_std_io() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
