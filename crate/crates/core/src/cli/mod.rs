//! Command-line front end: problem files in, trajectories and reports out.
//!
//! Exit codes: 0 converged, 1 usage/I/O/parse/validation error, 2 outer
//! iteration cap reached, 3 hypothesis hard failure under `--strict`,
//! 4 numerical failure. Every nonzero exit writes one JSON line to stderr.

mod assemble;
pub mod expr;
pub mod format;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

pub use assemble::{assemble, LoadedProblem};
pub use format::*;

use crate::evolution::{
    fit_order, solve_fpdvi, EvolutionError, SolveOptions, SolveOutcome, SolveReport, Trajectory,
};
use crate::hypotheses::{run_hypotheses, trajectory_chi, HypothesisReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_HYPOTHESIS: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{path}: line {line}, column {column}, field {field}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        field: String,
        message: String,
    },
    #[error("field {field}: {message}")]
    Validation { field: String, message: String },
    #[error("field {field}: {message}")]
    Unsupported { field: String, message: String },
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Numeric(_) => EXIT_NUMERIC,
            _ => EXIT_INPUT,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Usage(_) => "UsageError",
            Self::Io { .. } => "IoError",
            Self::Parse { .. } => "ParseError",
            Self::Validation { .. } => "ValidationError",
            Self::Unsupported { .. } => "UnsupportedCombination",
            Self::Numeric(_) => "NumericFailure",
        }
    }

    /// One-line machine-readable record.
    pub fn record(&self) -> serde_json::Value {
        let mut r = json!({
            "status": "error",
            "exit_code": self.exit_code(),
            "kind": self.kind(),
            "message": self.to_string(),
        });
        match self {
            Self::Parse {
                line,
                column,
                field,
                ..
            } => {
                r["line"] = json!(line);
                r["column"] = json!(column);
                r["field"] = json!(field);
            }
            Self::Validation { field, .. } | Self::Unsupported { field, .. } => {
                r["field"] = json!(field);
            }
            _ => {}
        }
        r
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Parses problem JSON; errors carry line, column and field path.
pub fn parse_problem(text: &str, path: &Path) -> Result<ProblemFile, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = match e.path().to_string() {
            p if p == "?" || p == "." => "(document)".to_string(),
            p => p,
        };
        let inner = e.into_inner();
        CliError::Parse {
            path: path.to_path_buf(),
            line: inner.line(),
            column: inner.column(),
            field,
            message: inner.to_string(),
        }
    })
}

pub fn read_problem(path: &Path) -> Result<ProblemFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_problem(&text, path)
}

/// Reads, validates and builds the problem in `path`.
pub fn load_problem(path: &Path) -> Result<LoadedProblem, CliError> {
    assemble(read_problem(path)?)
}

/// Solver overrides shared by `run` and `sweep`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunFlags {
    /// Output directory.
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// Picard stopping tolerance on the sup-norm change.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Outer iteration cap.
    #[arg(long)]
    pub max_outer: Option<usize>,
    /// Initial relaxation factor in (0, 1].
    #[arg(long)]
    pub damping: Option<f64>,
    /// Do not run the hypothesis checks.
    #[arg(long)]
    pub skip_hypotheses: bool,
    /// Exit with code 3 without solving when a hypothesis hard-fails.
    #[arg(long)]
    pub strict: bool,
    /// Root seed for every randomized probe.
    #[arg(long)]
    pub seed: Option<u64>,
    /// `N` or `N:graded:GAMMA`.
    #[arg(long)]
    pub grid: Option<String>,
}

fn parse_grid(spec: &str) -> Result<GridSpec, CliError> {
    let bad = || CliError::Usage(format!("--grid expects N or N:graded:GAMMA, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let n: usize = parts[0].parse().map_err(|_| bad())?;
    match parts.as_slice() {
        [_] => Ok(GridSpec {
            intervals: n,
            kind: GridKindSpec::Uniform,
            gamma: None,
        }),
        [_, "graded", g] => Ok(GridSpec {
            intervals: n,
            kind: GridKindSpec::Graded,
            gamma: Some(g.parse().map_err(|_| bad())?),
        }),
        _ => Err(bad()),
    }
}

impl RunFlags {
    /// Applies the overrides to `file` so the echoed configuration is the
    /// one actually run.
    pub fn apply(&self, file: &mut ProblemFile) -> Result<(), CliError> {
        if let Some(t) = self.tol {
            file.solver.tol = t;
        }
        if let Some(k) = self.max_outer {
            file.solver.max_outer = k;
        }
        if let Some(d) = self.damping {
            file.solver.damping = d;
        }
        if let Some(s) = self.seed {
            file.solver.seed = s;
        }
        if let Some(g) = &self.grid {
            file.grid = parse_grid(g)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
struct HypothesisSummary<'a> {
    hard_fail: bool,
    p1_pass: bool,
    p1_worst: f64,
    p3_pass: bool,
    p3_vacuous: bool,
    condition_43_pass: bool,
    condition_43_margin: f64,
    theta_a_regularized: f64,
    theta_a_integrated: f64,
    theta_a_delta: Option<f64>,
    theta_g: f64,
    weight_l: Option<f64>,
    weight_certificate: Option<f64>,
    chi: &'a Option<crate::hypotheses::ChiReport>,
    root_seed: u64,
    caveat: &'a Option<String>,
}

impl<'a> HypothesisSummary<'a> {
    fn of(r: &'a HypothesisReport) -> Self {
        Self {
            hard_fail: r.hard_fail,
            p1_pass: r.p1_monotone.pass,
            p1_worst: r.p1_monotone.worst,
            p3_pass: r.p3_coercive.pass,
            p3_vacuous: r.p3_coercive.vacuous,
            condition_43_pass: r.condition_43.pass,
            condition_43_margin: r.condition_43.margin,
            theta_a_regularized: r.theta_a.regularized,
            theta_a_integrated: r.theta_a.integrated,
            theta_a_delta: r.theta_a.delta,
            theta_g: r.growth_sampled.theta_g,
            weight_l: r.weight.as_ref().map(|w| w.l),
            weight_certificate: r.weight.as_ref().map(|w| w.certificate),
            chi: &r.chi,
            root_seed: r.seeds.root,
            caveat: &r.theta_a.caveat,
        }
    }
}

#[derive(Serialize)]
struct RunReport<'a> {
    status: &'static str,
    exit_code: i32,
    config: &'a ProblemFile,
    solver_options: SolveOptions,
    hypotheses: Option<HypothesisSummary<'a>>,
    solve: Option<&'a SolveReport>,
}

/// Result of one run, as listed in sweep summaries.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub exit_code: i32,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub runtime_seconds: f64,
    pub trajectory: Option<Trajectory>,
    /// Record printed to stderr for nonzero exits.
    pub record: Option<serde_json::Value>,
}

impl RunSummary {
    fn failed(e: &CliError) -> Self {
        Self {
            exit_code: e.exit_code(),
            converged: false,
            iterations: 0,
            residual: f64::NAN,
            runtime_seconds: 0.0,
            trajectory: None,
            record: Some(e.record()),
        }
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_error(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_error(path, e))
}

/// CSV with header `xi,theta_1..theta_n,u_1..u_m` and 17 significant digits.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.theta.first().map_or(0, |v| v.len());
    let m = traj.u.first().map_or(0, |v| v.len());
    let mut out = String::from("xi");
    for i in 1..=n {
        let _ = write!(out, ",theta_{i}");
    }
    for i in 1..=m {
        let _ = write!(out, ",u_{i}");
    }
    out.push('\n');
    for ((xi, th), u) in traj.grid.nodes().iter().zip(&traj.theta).zip(&traj.u) {
        let _ = write!(out, "{xi:.16e}");
        for v in th.iter().chain(u.iter()) {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    out
}

fn trajectory_json(traj: &Trajectory) -> serde_json::Value {
    let rows = |vs: &[nalgebra::DVector<f64>]| -> Vec<Vec<f64>> {
        vs.iter().map(|v| v.iter().copied().collect()).collect()
    };
    json!({
        "xi": traj.grid.nodes(),
        "theta": rows(&traj.theta),
        "u": rows(&traj.u),
    })
}

fn hard_fail_list(r: &HypothesisReport) -> Vec<&'static str> {
    let mut out = Vec::new();
    if !r.p1_monotone.pass {
        out.push("P1");
    }
    if !r.p3_coercive.pass {
        out.push("P3");
    }
    if !r.condition_43.pass {
        out.push("condition_4_3");
    }
    out
}

/// Runs hypotheses (unless skipped) and the solver on `loaded`, writing the
/// fixed output layout into `out`.
pub fn run_loaded(
    loaded: &LoadedProblem,
    flags: &RunFlags,
    out: &Path,
) -> Result<RunSummary, CliError> {
    let start = Instant::now();
    fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
    let mut hyp = if flags.skip_hypotheses {
        None
    } else {
        let r = run_hypotheses(&loaded.problem, &loaded.hypotheses, loaded.seed)
            .map_err(|e| CliError::Numeric(format!("hypothesis suite: {e}")))?;
        Some(r)
    };
    let hyp_seconds = start.elapsed().as_secs_f64();

    if let Some(h) = hyp.as_ref().filter(|h| flags.strict && h.hard_fail) {
        write_json(&out.join("hypotheses.json"), h)?;
        let report = RunReport {
            status: "hypothesis_hard_fail",
            exit_code: EXIT_HYPOTHESIS,
            config: &loaded.file,
            solver_options: loaded.options,
            hypotheses: Some(HypothesisSummary::of(h)),
            solve: None,
        };
        write_json(&out.join("report.json"), &report)?;
        write_timing(out, hyp_seconds, 0.0, start)?;
        return Ok(RunSummary {
            exit_code: EXIT_HYPOTHESIS,
            converged: false,
            iterations: 0,
            residual: f64::NAN,
            runtime_seconds: start.elapsed().as_secs_f64(),
            trajectory: None,
            record: Some(json!({
                "status": "hypothesis_hard_fail",
                "exit_code": EXIT_HYPOTHESIS,
                "kind": "HypothesisHardFail",
                "failed": hard_fail_list(h),
            })),
        });
    }

    let solve_start = Instant::now();
    let (outcome, status, code): (SolveOutcome, &'static str, i32) =
        match solve_fpdvi(&loaded.problem, &loaded.grid, &loaded.options) {
            Ok(o) => (o, "converged", EXIT_OK),
            Err(EvolutionError::MaxOuterExceeded(o)) => {
                (*o, "max_outer_exceeded", EXIT_NOT_CONVERGED)
            }
            Err(
                e @ (EvolutionError::InvalidProblem(_)
                | EvolutionError::InvalidOptions(_)
                | EvolutionError::DimensionMismatch(_)),
            ) => {
                return Err(CliError::Validation {
                    field: "problem".into(),
                    message: e.to_string(),
                })
            }
            Err(e) => return Err(CliError::Numeric(e.to_string())),
        };
    let solve_seconds = solve_start.elapsed().as_secs_f64();

    if let Some(h) = hyp.as_mut() {
        h.chi = trajectory_chi(&outcome.trajectory).ok();
    }
    let traj = &outcome.trajectory;
    let csv_path = out.join("trajectory.csv");
    fs::write(&csv_path, trajectory_csv(traj)).map_err(|e| io_error(&csv_path, e))?;
    write_json(&out.join("trajectory.json"), &trajectory_json(traj))?;
    match &hyp {
        Some(h) => write_json(&out.join("hypotheses.json"), h)?,
        None => write_json(&out.join("hypotheses.json"), &json!({ "skipped": true }))?,
    }
    let report = RunReport {
        status,
        exit_code: code,
        config: &loaded.file,
        solver_options: loaded.options,
        hypotheses: hyp.as_ref().map(HypothesisSummary::of),
        solve: Some(&outcome.report),
    };
    write_json(&out.join("report.json"), &report)?;
    write_timing(out, hyp_seconds, solve_seconds, start)?;

    let r = &outcome.report;
    let record = (code != EXIT_OK).then(|| {
        json!({
            "status": status,
            "exit_code": code,
            "kind": "MaxOuterExceeded",
            "iterations": r.iterations,
            "final_change": r.final_change,
        })
    });
    Ok(RunSummary {
        exit_code: code,
        converged: r.converged,
        iterations: r.iterations,
        residual: r.fpdvi_residual,
        runtime_seconds: start.elapsed().as_secs_f64(),
        trajectory: Some(outcome.trajectory),
        record,
    })
}

fn write_timing(out: &Path, hyp: f64, solve: f64, start: Instant) -> Result<(), CliError> {
    write_json(
        &out.join("timing.json"),
        &json!({
            "hypotheses_seconds": hyp,
            "solve_seconds": solve,
            "total_seconds": start.elapsed().as_secs_f64(),
        }),
    )
}

fn run_path(path: &Path, flags: &RunFlags, out: &Path) -> Result<RunSummary, CliError> {
    let mut file = read_problem(path)?;
    flags.apply(&mut file)?;
    run_loaded(&assemble(file)?, flags, out)
}

fn emit(record: &Option<serde_json::Value>) {
    if let Some(r) = record {
        eprintln!("{r}");
    }
}

/// Runs every path; with several paths each writes into `out/<file stem>`.
/// Returns the largest exit code.
pub fn run(paths: &[PathBuf], flags: &RunFlags) -> i32 {
    if paths.is_empty() {
        let e = CliError::Usage("no problem files given".into());
        emit(&Some(e.record()));
        return e.exit_code();
    }
    let mut worst = EXIT_OK;
    for path in paths {
        let out = if paths.len() == 1 {
            flags.out.clone()
        } else {
            let stem = path
                .file_stem()
                .map_or_else(|| "problem".into(), |s| s.to_os_string());
            flags.out.join(stem)
        };
        let summary = run_path(path, flags, &out).unwrap_or_else(|e| RunSummary::failed(&e));
        emit(&summary.record);
        if summary.exit_code == EXIT_OK {
            println!(
                "{}: converged in {} iterations, residual {:.3e}",
                path.display(),
                summary.iterations,
                summary.residual
            );
        }
        worst = worst.max(summary.exit_code);
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepParam {
    Alpha,
    #[value(name = "N")]
    N,
    #[value(name = "T")]
    T,
    Damping,
}

impl SweepParam {
    fn name(self) -> &'static str {
        match self {
            Self::Alpha => "alpha",
            Self::N => "N",
            Self::T => "T",
            Self::Damping => "damping",
        }
    }

    fn set(self, file: &mut ProblemFile, value: &str) -> Result<(), CliError> {
        let bad = || CliError::Usage(format!("invalid {} value {value:?}", self.name()));
        match self {
            Self::Alpha => file.alpha = value.parse().map_err(|_| bad())?,
            Self::T => file.horizon = value.parse().map_err(|_| bad())?,
            Self::Damping => file.solver.damping = value.parse().map_err(|_| bad())?,
            Self::N => file.grid.intervals = value.parse().map_err(|_| bad())?,
        }
        Ok(())
    }
}

/// Fine-grid factor of the reference solve in `N` sweeps.
pub const SWEEP_REFERENCE_FACTOR: usize = 8;

/// Runs `path` once per value of `param`, each into `out/<param>_<index>`,
/// and writes `out/sweep.csv`; `N` sweeps also write `out/order.json`.
pub fn sweep(path: &Path, param: SweepParam, values: &[String], flags: &RunFlags) -> i32 {
    match sweep_inner(path, param, values, flags) {
        Ok(code) => code,
        Err(e) => {
            emit(&Some(e.record()));
            e.exit_code()
        }
    }
}

fn sweep_inner(
    path: &Path,
    param: SweepParam,
    values: &[String],
    flags: &RunFlags,
) -> Result<i32, CliError> {
    if values.is_empty() {
        return Err(CliError::Usage("sweep needs at least one value".into()));
    }
    let mut base = read_problem(path)?;
    flags.apply(&mut base)?;
    fs::create_dir_all(&flags.out).map_err(|e| io_error(&flags.out, e))?;
    let mut csv = String::from("value,exit_code,converged,iterations,residual,runtime_seconds\n");
    let mut worst = EXIT_OK;
    let mut rows = Vec::with_capacity(values.len());
    for (i, value) in values.iter().enumerate() {
        let out = flags.out.join(format!("{}_{i}", param.name()));
        let summary = (|| {
            let mut file = base.clone();
            param.set(&mut file, value)?;
            run_loaded(&assemble(file)?, flags, &out)
        })()
        .unwrap_or_else(|e| RunSummary::failed(&e));
        emit(&summary.record);
        let _ = writeln!(
            csv,
            "{value},{},{},{},{:.16e},{:.6}",
            summary.exit_code,
            summary.converged,
            summary.iterations,
            summary.residual,
            summary.runtime_seconds
        );
        worst = worst.max(summary.exit_code);
        rows.push(summary);
    }
    let csv_path = flags.out.join("sweep.csv");
    fs::write(&csv_path, &csv).map_err(|e| io_error(&csv_path, e))?;
    print!("{csv}");

    if param == SweepParam::N {
        let order = sweep_order(&base, &rows)?;
        println!("order: {}", order["order"]);
        write_json(&flags.out.join("order.json"), &order)?;
    }
    Ok(worst)
}

fn sweep_order(base: &ProblemFile, rows: &[RunSummary]) -> Result<serde_json::Value, CliError> {
    let solved: Vec<&Trajectory> = rows
        .iter()
        .filter(|r| r.converged)
        .filter_map(|r| r.trajectory.as_ref())
        .collect();
    let Some(max_n) = solved.iter().map(|t| t.grid.intervals()).max() else {
        return Ok(json!({ "rows": [], "order": null }));
    };
    let mut file = base.clone();
    file.grid.intervals = SWEEP_REFERENCE_FACTOR * max_n;
    let loaded = assemble(file)?;
    let fine = solve_fpdvi(&loaded.problem, &loaded.grid, &loaded.options)
        .map_err(|e| CliError::Numeric(format!("reference solve: {e}")))?
        .trajectory;
    let errors: Vec<(usize, f64)> = solved
        .iter()
        .map(|t| {
            let err = t
                .grid
                .nodes()
                .iter()
                .zip(&t.theta)
                .map(|(&x, th)| (th - fine.grid.interpolate(&fine.theta, x)).norm())
                .fold(0.0, f64::max);
            (t.grid.intervals(), err)
        })
        .collect();
    Ok(json!({
        "reference_intervals": fine.grid.intervals(),
        "rows": errors,
        "order": fit_order(&errors),
    }))
}

#[derive(Debug, Parser)]
#[command(
    name = "fpdvi",
    version,
    about = "Fractional differential variational inequality solver"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one or more problem files.
    Run {
        /// Problem files; several files go to one subdirectory each.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Solve one problem file for several values of a parameter.
    Sweep {
        /// Problem file.
        path: PathBuf,
        /// Parameter to vary.
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[command(flatten)]
        flags: RunFlags,
    },
}

/// Entry point of the `fpdvi` binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let err = CliError::Usage(e.to_string().lines().next().unwrap_or_default().to_string());
            emit(&Some(err.record()));
            return err.exit_code();
        }
    };
    match cli.command {
        Command::Run { paths, flags } => run(&paths, &flags),
        Command::Sweep {
            path,
            param,
            values,
            flags,
        } => {
            let list: Vec<String> = values
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
            sweep(&path, param, &list, &flags)
        }
    }
}
