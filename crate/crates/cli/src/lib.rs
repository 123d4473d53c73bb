//! Experiment driver behind the `ncgm` binary.
//!
//! Exit codes: 0 success, 1 property violation or runtime failure, 2 usage
//! error, 3 instance generation failure.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use ncgm::composite::{solve, tune_delta, tune_lambda, CompositeAlgorithm, CompositeSolverSpec, TUNING_GRID};
use ncgm::diagnostics::{measured_snr, read_trace_csv, render_svg_plot, write_atomic, write_trace_csv, Column, Trace};
use ncgm::momentum::{HsDyDenominator, MomentumKind};
use ncgm::problem::{
    derive_seed, gaussian_vector_seeded, generate_sparse, laplacian_quadratic, random_spd, Family,
    ProblemRecipe, CONSTRUCTION_MAX_ITERS, CONSTRUCTION_TOL,
};
use ncgm::prox::RegularizerKind;
use ncgm::smooth::{run_smooth, verify_convergence_bound, QuadraticProblem, SmoothAlgorithm, SmoothSolverSpec, StepMode};
use ncgm::{Error, Vector};

/// Environment variable overriding the default output directory.
pub const OUT_DIR_ENV: &str = "NCGM_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "ncgm-out";
/// Seeds tried by `sparse --mode constructed` before giving up.
pub const CONSTRUCTION_ATTEMPTS: usize = 20;

#[derive(Debug, Parser)]
#[command(name = "ncgm", version, about = "Momentum gradient and proximal solver benchmarks")]
pub struct Cli {
    /// Output directory (overrides the NCGM_OUT_DIR environment variable).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Smooth solvers on the circular-graph Laplacian quadratic.
    Quad(QuadArgs),
    /// Proximal solvers on a sparse-recovery instance.
    Sparse(SparseArgs),
    /// Check the fixed-step FRGD residual bound on a random SPD matrix.
    VerifyBound(BoundArgs),
    /// Re-render an SVG from trace CSVs.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct QuadArgs {
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 0.3)]
    pub alpha: f64,
    /// Momentum weight for gdm.
    #[arg(long, default_value_t = 0.9)]
    pub beta: f64,
    #[arg(long, default_value_t = 3000)]
    pub iters: usize,
    /// Comma-separated list from gd-fx, gd-ls, sd, gdm-fx, gdm-ls, nag-fx,
    /// nag-ls, frgd-fx, frgd-ls.
    #[arg(long, value_delimiter = ',', default_value = "gd-fx,gdm-fx,nag-fx,frgd-fx,gd-ls,gdm-ls,nag-ls,frgd-ls")]
    pub solvers: Vec<String>,
    /// Use the raw impulse right-hand side (no ground truth).
    #[arg(long)]
    pub uncentered: bool,
    #[arg(long, default_value_t = 0.0)]
    pub stop_tol: f64,
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Constructed,
    Random,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "constructed" => Ok(Mode::Constructed),
            "random" => Ok(Mode::Random),
            _ => Err(format!("expected `constructed` or `random`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoOr {
    Auto,
    Value(f64),
}

fn parse_auto(s: &str, keyword: &str) -> Result<AutoOr, String> {
    if s == keyword {
        return Ok(AutoOr::Auto);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(AutoOr::Value(v)),
        _ => Err(format!("expected `{keyword}` or a positive number, got `{s}`")),
    }
}

fn parse_lambda(s: &str) -> Result<AutoOr, String> {
    parse_auto(s, "auto")
}

fn parse_delta(s: &str) -> Result<AutoOr, String> {
    parse_auto(s, "sweep")
}

fn parse_reg(s: &str) -> Result<RegularizerKind, String> {
    match s {
        "l1" => Ok(RegularizerKind::L1),
        "l12" => Ok(RegularizerKind::L1MinusL2),
        _ => Err(format!("expected `l1` or `l12`, got `{s}`")),
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SparseArgs {
    #[arg(long, default_value_t = 256)]
    pub rows: usize,
    #[arg(long, default_value_t = 1024)]
    pub cols: usize,
    #[arg(long, default_value_t = 5)]
    pub sparsity: usize,
    /// `l1` or `l12`.
    #[arg(long, default_value = "l1", value_parser = parse_reg)]
    pub reg: RegularizerKind,
    /// `constructed` or `random`.
    #[arg(long, default_value = "constructed")]
    pub mode: Mode,
    #[arg(long, default_value_t = 30.0)]
    pub snr: f64,
    /// A positive value, or `auto` (random mode only).
    #[arg(long, default_value = "0.1", value_parser = parse_lambda)]
    pub lambda: AutoOr,
    /// A positive value, or `sweep` to tune each solver over the decade grid.
    #[arg(long, default_value = "sweep", value_parser = parse_delta)]
    pub delta: AutoOr,
    /// Comma-separated list from ista, fista, apg, frprox, prprox, hsprox,
    /// dyprox, dca.
    #[arg(long, value_delimiter = ',', default_value = "fista,apg,frprox")]
    pub solvers: Vec<String>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    /// Budget of each tuning run; defaults to `--iters`.
    #[arg(long)]
    pub tune_iters: Option<usize>,
    #[arg(long, default_value_t = 1e-8)]
    pub inner_tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub inner_max: usize,
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    /// Use `<d, y>` instead of `-<x, y>` in the HS and DY denominators.
    #[arg(long)]
    pub conventional_denominator: bool,
    /// Also write the generated instance as instance.json.
    #[arg(long)]
    pub save_instance: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BoundArgs {
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub seed: u64,
    /// A positive step, or `auto` for 1/||A||_2.
    #[arg(long, default_value = "auto", value_parser = parse_lambda)]
    pub alpha: AutoOr,
    #[arg(long, default_value_t = 30)]
    pub iters: usize,
    /// Debug: zero the last row and column of A before checking.
    #[arg(long, hide = true)]
    pub inject_singular: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PlotArgs {
    /// Trace CSV files; each becomes one series named after its file stem.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = "rel_error")]
    pub column: String,
    /// Output SVG path; defaults to `<out-dir>/plot-<column>.svg`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub log: bool,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Violation(String),
    Generation(String),
    Runtime(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Violation(_) | Failure::Runtime(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Generation(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Violation(m) => write!(f, "violation: {m}"),
            Failure::Generation(m) => write!(f, "generation failed: {m}"),
            Failure::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("{f}");
            f.code()
        }
    }
}

pub fn resolve_out_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

pub fn execute(cli: &Cli) -> CmdResult {
    let out = resolve_out_dir(cli.out_dir.as_deref());
    match &cli.command {
        Command::Quad(a) => cmd_quad(a, &out),
        Command::Sparse(a) => cmd_sparse(a, &out),
        Command::VerifyBound(a) => cmd_verify_bound(a, &out),
        Command::Plot(a) => cmd_plot(a, &out),
    }
}

fn prepare_dir(dir: &Path) -> CmdResult {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))
}

fn write_json(path: &Path, value: &serde_json::Value) -> CmdResult {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))?;
    write_atomic(path, format!("{text}\n").as_bytes())?;
    Ok(())
}

#[derive(Serialize)]
struct PlotSpec {
    svg: String,
    column: &'static str,
    log: bool,
    inputs: Vec<String>,
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Writes one CSV per trace, then renders each plot from the files just
/// written so a later `plot` invocation reproduces the SVGs exactly.
fn write_traces_and_plots(
    out: &Path,
    traces: &[Trace],
    plots: &[(&str, Column, bool)],
) -> Result<Vec<PlotSpec>, Failure> {
    let mut csvs = Vec::with_capacity(traces.len());
    for t in traces {
        let path = out.join(format!("{}.csv", t.label));
        write_trace_csv(t, &path)?;
        csvs.push(path);
    }
    let reread = csvs
        .iter()
        .map(|p| read_trace_csv(p))
        .collect::<ncgm::Result<Vec<_>>>()?;
    let mut specs = Vec::new();
    for &(name, column, log) in plots {
        let with_column: Vec<Trace> = reread.iter().filter(|t| t.has_column(column)).cloned().collect();
        if with_column.is_empty() {
            continue;
        }
        let svg = out.join(format!("{name}-{}.svg", column.name()));
        render_svg_plot(&with_column, column, &svg, log)?;
        specs.push(PlotSpec {
            svg: file_name(&svg),
            column: column.name(),
            log,
            inputs: with_column.iter().map(|t| format!("{}.csv", t.label)).collect(),
        });
    }
    Ok(specs)
}

fn echo_config(out: &Path, command: &Command, resolved: serde_json::Value) -> CmdResult {
    write_json(
        &out.join("config-echo.json"),
        &json!({
            "command": command,
            "out_dir": out.to_string_lossy(),
            "resolved": resolved,
        }),
    )
}

pub fn parse_smooth_solver(name: &str, alpha: f64, beta: f64) -> Result<SmoothSolverSpec, Failure> {
    const VALID: &str = "gd-fx, gd-ls, sd, gdm-fx, gdm-ls, nag-fx, nag-ls, frgd-fx, frgd-ls";
    let (alg, step) = match name {
        "sd" => (SmoothAlgorithm::Sd, StepMode::ExactLineSearch),
        _ => {
            let (alg, step) = name
                .rsplit_once('-')
                .ok_or_else(|| Failure::Usage(format!("unknown solver `{name}`; valid names: {VALID}")))?;
            let alg = match alg {
                "gd" => SmoothAlgorithm::Gd,
                "gdm" => SmoothAlgorithm::Gdm { beta },
                "nag" => SmoothAlgorithm::Nag,
                "frgd" => SmoothAlgorithm::Frgd,
                _ => return Err(Failure::Usage(format!("unknown solver `{name}`; valid names: {VALID}"))),
            };
            let step = match step {
                "fx" => StepMode::Fixed(alpha),
                "ls" => StepMode::ExactLineSearch,
                _ => return Err(Failure::Usage(format!("unknown solver `{name}`; valid names: {VALID}"))),
            };
            (alg, step)
        }
    };
    Ok(SmoothSolverSpec::new(alg, step, 1))
}

pub fn cmd_quad(args: &QuadArgs, out: &Path) -> CmdResult {
    if args.n < 3 {
        return Err(Failure::Usage(format!("--n must be at least 3, got {}", args.n)));
    }
    if !(args.alpha > 0.0 && args.alpha.is_finite()) || args.iters == 0 || args.record_every == 0 {
        return Err(Failure::Usage("--alpha, --iters and --record-every must be positive".into()));
    }
    let mut specs = Vec::new();
    for name in &args.solvers {
        let mut spec = parse_smooth_solver(name, args.alpha, args.beta)?;
        spec.max_iters = args.iters;
        spec.stop_tol = args.stop_tol;
        spec.record_every = args.record_every;
        spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        specs.push(spec);
    }
    let p = laplacian_quadratic(args.n, !args.uncentered)?;
    prepare_dir(out)?;
    let x0 = Vector::zeros(args.n);
    let mut traces = Vec::new();
    let mut summary = Vec::new();
    for spec in &specs {
        let run = run_smooth(&p, spec, &x0)?;
        let last = run.trace.last().expect("trace has an initial row");
        println!(
            "{:<8} iters={:<6} objective={:.12e} grad_norm={:.6e}{}",
            run.trace.label,
            last.iter,
            last.objective,
            last.norm,
            last.rel_error.map(|e| format!(" rel_error={e:.6e}")).unwrap_or_default()
        );
        summary.push(json!({
            "label": run.trace.label,
            "iterations": last.iter,
            "final_objective": last.objective,
            "final_grad_norm": last.norm,
            "final_rel_error": last.rel_error,
            "diverged": run.trace.diverged(),
        }));
        traces.push(run.trace);
    }
    // g* is negative, so the objective is plotted on a linear axis
    let plots = write_traces_and_plots(
        out,
        &traces,
        &[("quad", Column::RelError, true), ("quad", Column::Objective, false)],
    )?;
    write_json(&out.join("summary.json"), &json!({ "command": "quad", "solvers": summary }))?;
    echo_config(
        out,
        &Command::Quad(args.clone()),
        json!({ "specs": specs, "centered": !args.uncentered, "plots": plots }),
    )
}

fn parse_composite_solvers(names: &[String], reg: RegularizerKind) -> Result<Vec<CompositeAlgorithm>, Failure> {
    let mut algs = Vec::new();
    for name in names {
        let alg = CompositeAlgorithm::from_str(name).map_err(|e| Failure::Usage(e.to_string()))?;
        if alg == CompositeAlgorithm::Dca && reg != RegularizerKind::L1MinusL2 {
            return Err(Failure::Usage("dca requires --reg l12".into()));
        }
        algs.push(alg);
    }
    Ok(algs)
}

pub fn cmd_sparse(args: &SparseArgs, out: &Path) -> CmdResult {
    let algs = parse_composite_solvers(&args.solvers, args.reg)?;
    if args.iters == 0 || args.record_every == 0 || args.inner_max == 0 || args.tune_iters == Some(0) {
        return Err(Failure::Usage("budgets must be positive".into()));
    }
    if args.mode == Mode::Constructed && args.lambda == AutoOr::Auto {
        return Err(Failure::Usage(
            "--lambda auto needs --mode random (constructed data depends on lambda)".into(),
        ));
    }
    let family = match args.mode {
        Mode::Constructed => Family::SparseConstructed,
        Mode::Random => Family::SparseRandom,
    };
    let mut recipe = ProblemRecipe {
        family,
        rows: args.rows,
        cols: args.cols,
        sparsity: args.sparsity,
        snr_db: args.snr,
        lambda: match args.lambda {
            AutoOr::Value(v) => v,
            AutoOr::Auto => 1.0,
        },
        seed: args.seed,
        reg: args.reg,
    };
    recipe.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let generated = match generate_sparse(&recipe, CONSTRUCTION_ATTEMPTS, CONSTRUCTION_MAX_ITERS, CONSTRUCTION_TOL) {
        Ok(g) => g,
        Err(e @ Error::ConstructionFailed { .. }) => return Err(Failure::Generation(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let mut problem = generated.instance.problem()?;
    let snr = match &generated.clean {
        Some(clean) => Some(measured_snr(clean, &problem.b)?),
        None => None,
    };
    let x0 = Vector::zeros(args.cols);
    let tune_iters = args.tune_iters.unwrap_or(args.iters);
    let base_spec = |alg: CompositeAlgorithm, delta: f64, iters: usize| {
        let mut s = CompositeSolverSpec::new(alg, delta, iters);
        s.inner_tol = args.inner_tol;
        s.inner_max = args.inner_max;
        s.record_every = args.record_every;
        if args.conventional_denominator {
            s.denominator = HsDyDenominator::Conventional;
        }
        s
    };

    let mut lambda_tuning = None;
    if args.lambda == AutoOr::Auto {
        let spec = base_spec(CompositeAlgorithm::MomentumProx(MomentumKind::Fr), 1e-3, tune_iters);
        let outcome = tune_lambda(&problem, &spec, &x0, &TUNING_GRID)?;
        let best = outcome
            .best
            .ok_or_else(|| Failure::Violation("no convergent lambda on the tuning grid".into()))?;
        lambda_tuning = Some(outcome.points.iter().map(|p| json!([p.value, p.final_objective, p.convergent])).collect::<Vec<_>>());
        problem = problem.with_lambda(best)?;
        recipe.lambda = best;
    }

    prepare_dir(out)?;
    if args.save_instance {
        let mut instance = generated.instance.clone();
        instance.lambda = problem.lambda;
        write_atomic(&out.join("instance.json"), instance.to_json()?.as_bytes())?;
    }

    let mut traces = Vec::new();
    let mut summary = Vec::new();
    let mut resolved_specs = Vec::new();
    for alg in algs {
        let (delta, tuning) = match args.delta {
            AutoOr::Value(d) => (d, None),
            AutoOr::Auto => {
                let outcome = tune_delta(&problem, &base_spec(alg, 1.0, tune_iters), &x0, &TUNING_GRID)?;
                let best = outcome.best.unwrap_or_else(|| {
                    eprintln!(
                        "warning: {}: no convergent step size on the tuning grid, using {:e}",
                        alg.name(),
                        TUNING_GRID[0]
                    );
                    TUNING_GRID[0]
                });
                let pts: Vec<_> = outcome.points.iter().map(|p| json!([p.value, p.final_objective, p.convergent])).collect();
                (best, Some(json!({ "tuned": outcome.best.is_some(), "grid": pts })))
            }
        };
        let spec = base_spec(alg, delta, args.iters);
        let mut run = solve(&problem, &spec, &x0)?;
        run.trace.meta.recipe_hash = Some(recipe.hash());
        let last = run.trace.last().expect("trace has an initial row");
        println!(
            "{:<7} delta={:<6e} iters={:<6} objective={:.12e}{}",
            run.trace.label,
            delta,
            last.iter,
            last.objective,
            last.rel_error.map(|e| format!(" rel_error={e:.6e}")).unwrap_or_default()
        );
        summary.push(json!({
            "label": run.trace.label,
            "delta": delta,
            "iterations": last.iter,
            "initial_objective": run.trace.rows[0].objective,
            "final_objective": last.objective,
            "final_rel_error": last.rel_error,
            "diverged": run.trace.diverged(),
            "delta_tuning": tuning,
        }));
        resolved_specs.push(spec);
        traces.push(run.trace);
    }
    let plots = write_traces_and_plots(
        out,
        &traces,
        &[("sparse", Column::RelError, true), ("sparse", Column::Objective, true)],
    )?;
    write_json(
        &out.join("summary.json"),
        &json!({
            "command": "sparse",
            "recipe": recipe,
            "recipe_hash": recipe.hash(),
            "lambda": problem.lambda,
            "lambda_tuning": lambda_tuning,
            "construction_attempts": generated.attempts,
            "measured_snr_db": snr,
            "solvers": summary,
        }),
    )?;
    echo_config(
        out,
        &Command::Sparse(args.clone()),
        json!({ "recipe": recipe, "specs": resolved_specs, "tune_iters": tune_iters, "plots": plots }),
    )
}

/// Quadratic used by `verify-bound`: `A = G'G + I` and a Gaussian `b`.
pub fn bound_problem(n: usize, seed: u64) -> ncgm::Result<QuadraticProblem> {
    QuadraticProblem::new(random_spd(n, seed), gaussian_vector_seeded(n, derive_seed(seed, 1)))
}

pub fn cmd_verify_bound(args: &BoundArgs, out: &Path) -> CmdResult {
    if args.n < 2 {
        return Err(Failure::Usage(format!("--n must be at least 2, got {}", args.n)));
    }
    if args.iters == 0 {
        return Err(Failure::Usage("--iters must be positive".into()));
    }
    let mut p = bound_problem(args.n, args.seed)?;
    if args.inject_singular {
        let last = args.n - 1;
        p.a.row_mut(last).fill(0.0);
        p.a.column_mut(last).fill(0.0);
    }
    let alpha = match args.alpha {
        AutoOr::Value(a) => a,
        AutoOr::Auto => {
            let s = ncgm::linalg::svd_spectrum(&p.a).spectral_norm();
            if s == 0.0 {
                return Err(Failure::Generation("matrix is zero".into()));
            }
            1.0 / s
        }
    };
    let mut spec = SmoothSolverSpec::new(SmoothAlgorithm::Frgd, StepMode::Fixed(alpha), args.iters);
    spec.keep_iterates = true;
    let run = run_smooth(&p, &spec, &Vector::zeros(args.n))?;
    let report = match verify_convergence_bound(&p, &run.iterates, alpha) {
        Ok(r) => r,
        Err(e @ Error::Singular { .. }) => return Err(Failure::Generation(format!("refusing to check the bound: {e}"))),
        Err(e) => return Err(e.into()),
    };
    prepare_dir(out)?;
    write_trace_csv(&run.trace, &out.join(format!("{}.csv", run.trace.label)))?;
    write_atomic(&out.join("bound.csv"), report.to_csv().as_bytes())?;
    let violated: Vec<usize> = report.rows.iter().filter(|r| !r.holds).map(|r| r.l).collect();
    write_json(
        &out.join("summary.json"),
        &json!({
            "command": "verify-bound",
            "kappa": report.kappa_a,
            "spectral_norm": report.spectral_norm_a,
            "alpha": alpha,
            "rows_checked": report.rows.len(),
            "truncated_at": report.truncated_at,
            "violated": violated,
            "holds": report.holds(),
        }),
    )?;
    echo_config(out, &Command::VerifyBound(args.clone()), json!({ "alpha": alpha, "spec": spec }))?;
    println!(
        "kappa={:.6e} alpha={:.6e} rows={} truncated_at={:?} holds={}",
        report.kappa_a,
        alpha,
        report.rows.len(),
        report.truncated_at,
        report.holds()
    );
    if report.holds() {
        Ok(())
    } else {
        Err(Failure::Violation(format!("bound violated at l = {violated:?}")))
    }
}

pub fn cmd_plot(args: &PlotArgs, out: &Path) -> CmdResult {
    let column = Column::from_str(&args.column).map_err(|e| Failure::Usage(e.to_string()))?;
    let traces = args
        .inputs
        .iter()
        .map(|p| read_trace_csv(p))
        .collect::<ncgm::Result<Vec<_>>>()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let svg = args
        .out
        .clone()
        .unwrap_or_else(|| out.join(format!("plot-{}.svg", column.name())));
    let dir = svg.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    prepare_dir(dir)?;
    match render_svg_plot(&traces, column, &svg, args.log) {
        Ok(()) => {}
        Err(e @ Error::EmptyColumn { .. }) => return Err(Failure::Usage(e.to_string())),
        Err(e) => return Err(e.into()),
    }
    echo_config(dir, &Command::Plot(args.clone()), json!({ "svg": svg.to_string_lossy() }))
}
