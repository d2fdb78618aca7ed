//! The `covthresh` command line: partition, profile, solve, path, synth, bench.
//!
//! Every command prints a JSON run report on stdout. Exit codes: 0 success,
//! 2 input error, 3 solver failure or non-convergence (solve and path only).

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::compgraph::{
    component_profile, connected_components, critical_lambdas, lambda_for_max_component, support_graph,
    threshold_partition,
};
use crate::covmodel::{sample_covariance, to_correlation, DataMatrix, SolverConfig, SymMatrix};
use crate::error::{Error, Result};
use crate::glasso::{kkt_check, solve_full, GlassoSolution};
use crate::io;
use crate::screen::{path_solve, screen_solve, LambdaReport};
use crate::synth::{generate, SynthSidecar, SynthSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "covthresh", version, about = "Graphical lasso with exact covariance thresholding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Connected components of the thresholded covariance graph.
    Partition {
        matrix: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Component sizes over a grid of penalties.
    Profile {
        matrix: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Solve the graphical lasso at one penalty.
    Solve {
        matrix: PathBuf,
        #[arg(long)]
        lambda: f64,
        /// Split into thresholded components and solve each separately.
        #[arg(long)]
        screen: bool,
        #[arg(long, value_enum, default_value_t = Format::Triplet)]
        format: Format,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Screened solves along a descending penalty grid.
    Path {
        matrix: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Generate a block-diagonal synthetic covariance matrix.
    Synth {
        #[command(flatten)]
        spec: SpecArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Time screened against unscreened solves on a synthetic instance.
    Bench {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_enum, default_value_t = LambdaMode::Ii)]
        mode: LambdaMode,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// Skip the first line of the input file.
    #[arg(long)]
    header: bool,
    /// Treat the input as an n x p data matrix and form its sample covariance.
    #[arg(long)]
    data: bool,
    /// Do not center columns when forming the sample covariance.
    #[arg(long, requires = "data")]
    no_center: bool,
    /// Fill missing data values with column means.
    #[arg(long, requires = "data")]
    impute_mean: bool,
    /// Convert the covariance to a correlation matrix first.
    #[arg(long)]
    correlation: bool,
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-7)]
    kkt_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    conv_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    support_tol: f64,
    /// Cap on outer sweeps.
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            kkt_tol: self.kkt_tol,
            conv_tol: self.conv_tol,
            support_tol: self.support_tol,
            max_outer: self.max_iter,
            ..SolverConfig::default()
        }
    }
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    /// Comma-separated penalties, or `auto`.
    #[arg(long, default_value = "auto")]
    lambda_grid: String,
    /// Component size cap used by the automatic grid.
    #[arg(long)]
    p_max: Option<usize>,
    /// Percentage of the largest critical values kept by the automatic grid.
    #[arg(long, default_value_t = 2.0)]
    top_percent: f64,
    /// Upper bound on automatic grid points.
    #[arg(long, default_value_t = 100)]
    grid_points: usize,
}

#[derive(Args, Debug, Clone)]
struct SpecArgs {
    #[arg(long = "K")]
    k: usize,
    #[arg(long)]
    p1: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Output path (matrix file for solve/synth, directory for path, report otherwise).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the JSON run report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Worker threads for block solves.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Triplet,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
enum LambdaMode {
    #[value(name = "I")]
    I,
    #[value(name = "II")]
    Ii,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub outputs: Vec<String>,
    pub metrics: Value,
}

struct Outcome {
    report: RunReport,
    code: i32,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(Outcome { report, code }) => {
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            println!("{text}");
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::NotPositiveDefinite { .. } => EXIT_SOLVER,
        _ => EXIT_INPUT,
    }
}

fn dispatch(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Partition { matrix, lambda, input, common } => cmd_partition(&matrix, lambda, &input, &common),
        Command::Profile { matrix, grid, input, common } => cmd_profile(&matrix, &grid, &input, &common),
        Command::Solve { matrix, lambda, screen, format, input, solver, common } => {
            cmd_solve(&matrix, lambda, screen, format, &input, &solver, &common)
        }
        Command::Path { matrix, grid, input, solver, common } => cmd_path(&matrix, &grid, &input, &solver, &common),
        Command::Synth { spec, common } => cmd_synth(&spec, &common),
        Command::Bench { spec, mode, solver, common } => cmd_bench(&spec, mode, &solver, &common),
    }
}

fn configure_threads(common: &CommonArgs) {
    if let Some(n) = common.threads {
        if rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global().is_err() {
            log::warn!("thread pool already initialized; --threads ignored");
        }
    }
}

fn load_matrix(path: &Path, input: &InputArgs) -> Result<SymMatrix> {
    let text = std::fs::read_to_string(path)?;
    let s = if input.data {
        let rows = io::parse_csv_rows(&text, input.header)?;
        let rows = if input.impute_mean { io::impute_column_means(rows)? } else { io::require_complete(rows)? };
        sample_covariance(&DataMatrix::from_rows(&rows)?, !input.no_center)
    } else {
        io::parse_sym_matrix(&text, input.header)?
    };
    if input.correlation {
        to_correlation(&s)
    } else {
        Ok(s)
    }
}

fn input_echo(path: &Path, input: &InputArgs) -> Value {
    json!({
        "matrix": path.display().to_string(),
        "header": input.header,
        "data": input.data,
        "center": input.data && !input.no_center,
        "impute_mean": input.impute_mean,
        "correlation": input.correlation,
    })
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::Input(format!("lambda must be finite and nonnegative, got {lambda}")));
    }
    Ok(())
}

fn write_report_file(report: &mut RunReport, common: &CommonArgs) -> Result<()> {
    if let Some(path) = &common.report {
        report.outputs.push(path.display().to_string());
        std::fs::write(path, serde_json::to_string_pretty(report).expect("report serializes"))?;
    }
    Ok(())
}

fn finish(mut report: RunReport, common: &CommonArgs, code: i32) -> Result<Outcome> {
    write_report_file(&mut report, common)?;
    Ok(Outcome { report, code })
}

/// Partition report: `{"lambda", "num_components", "components", "sizes"}` with 1-based nodes.
pub fn partition_report(s: &SymMatrix, lambda: f64) -> Value {
    let part = threshold_partition(s, lambda);
    json!({
        "lambda": lambda,
        "num_components": part.num_blocks(),
        "components": part.one_based(),
        "sizes": part.sizes(),
    })
}

fn cmd_partition(path: &Path, lambda: f64, input: &InputArgs, common: &CommonArgs) -> Result<Outcome> {
    check_lambda(lambda)?;
    let s = load_matrix(path, input)?;
    let mut inputs = input_echo(path, input);
    inputs["lambda"] = json!(lambda);
    let report =
        RunReport { command: "partition".into(), inputs, outputs: Vec::new(), metrics: partition_report(&s, lambda) };
    finish(report, common, EXIT_OK)
}

/// The largest `top_percent`% of critical values at or above the size-capped
/// penalty, thinned to at most `max_points`, ascending.
pub fn auto_grid(s: &SymMatrix, p_max: usize, top_percent: f64, max_points: usize) -> Result<Vec<f64>> {
    if !(top_percent > 0.0 && top_percent <= 100.0) {
        return Err(Error::Input(format!("top percent must lie in (0, 100], got {top_percent}")));
    }
    if max_points == 0 {
        return Err(Error::Input("grid needs at least one point".into()));
    }
    let floor = lambda_for_max_component(s, p_max)?;
    let mut cands: Vec<f64> = if s.dim() >= 2 { critical_lambdas(s) } else { Vec::new() };
    cands.retain(|&c| c >= floor);
    if cands.is_empty() {
        return Ok(vec![floor]);
    }
    cands.reverse();
    let keep = ((top_percent / 100.0) * cands.len() as f64).ceil().max(1.0) as usize;
    cands.truncate(keep.min(cands.len()));
    let mut grid: Vec<f64> = if cands.len() > max_points {
        let step = (cands.len() - 1) as f64 / (max_points - 1).max(1) as f64;
        (0..max_points).map(|k| cands[(k as f64 * step).round() as usize]).collect()
    } else {
        cands
    };
    grid.sort_unstable_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

fn resolve_grid(s: &SymMatrix, grid: &GridArgs) -> Result<Vec<f64>> {
    if grid.lambda_grid.trim().eq_ignore_ascii_case("auto") {
        let p_max = grid.p_max.unwrap_or(s.dim());
        return auto_grid(s, p_max, grid.top_percent, grid.grid_points);
    }
    let mut out = Vec::new();
    for tok in grid.lambda_grid.split(',') {
        let tok = tok.trim();
        let v: f64 = tok.parse().map_err(|_| Error::Input(format!("bad lambda value {tok:?}")))?;
        check_lambda(v)?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::Input("lambda grid is empty".into()));
    }
    Ok(out)
}

fn cmd_profile(path: &Path, grid: &GridArgs, input: &InputArgs, common: &CommonArgs) -> Result<Outcome> {
    let s = load_matrix(path, input)?;
    let lambdas = resolve_grid(&s, grid)?;
    let profile = component_profile(&s, &lambdas)?;
    let mut inputs = input_echo(path, input);
    inputs["lambda_grid"] = json!(grid.lambda_grid);
    inputs["p_max"] = json!(grid.p_max);
    inputs["top_percent"] = json!(grid.top_percent);
    let mut metrics = json!({ "lambdas": profile.lambdas, "sizes": profile.sizes });
    if let Some(p_max) = grid.p_max {
        metrics["lambda_p_max"] = json!(lambda_for_max_component(&s, p_max)?);
    }
    let mut outputs = Vec::new();
    if let Some(out) = &common.out {
        std::fs::write(out, serde_json::to_string_pretty(&metrics).expect("profile serializes"))?;
        outputs.push(out.display().to_string());
    }
    finish(RunReport { command: "profile".into(), inputs, outputs, metrics }, common, EXIT_OK)
}

fn write_theta(theta: &SymMatrix, out: &Path, format: Format) -> Result<()> {
    let text = match format {
        Format::Csv => io::format_csv(&theta.to_rows()),
        Format::Triplet => io::format_triplets(theta),
    };
    std::fs::write(out, text)?;
    Ok(())
}

fn full_metrics(s: &SymMatrix, sol: &GlassoSolution, cfg: &SolverConfig, seconds: f64) -> Value {
    let kkt = kkt_check(s, sol, cfg);
    let part = connected_components(&support_graph(&sol.theta, cfg.support_tol));
    json!({
        "lambda": sol.lambda,
        "num_components": part.num_blocks(),
        "max_component": part.max_block_size(),
        "objective": sol.objective,
        "converged": sol.converged,
        "kkt_passed": kkt.passed,
        "time_partition_ms": 0.0,
        "time_solve_ms": seconds * 1e3,
        "iterations": sol.iterations,
        "kkt": kkt,
    })
}

fn cmd_solve(
    path: &Path,
    lambda: f64,
    screen: bool,
    format: Format,
    input: &InputArgs,
    solver: &SolverArgs,
    common: &CommonArgs,
) -> Result<Outcome> {
    configure_threads(common);
    check_lambda(lambda)?;
    let cfg = solver.config();
    cfg.validate()?;
    let s = load_matrix(path, input)?;
    let mut inputs = input_echo(path, input);
    inputs["lambda"] = json!(lambda);
    inputs["screen"] = json!(screen);
    inputs["solver"] = solver_echo(&cfg);

    let (theta, metrics, converged) = if screen {
        let sol = screen_solve(&s, lambda, &cfg, None)?;
        let mut m = serde_json::to_value(LambdaReport::from(&sol)).expect("report serializes");
        m["kkt"] = serde_json::to_value(&sol.global_kkt).expect("kkt serializes");
        m["failed_blocks"] = json!(sol.failed_blocks);
        m["components"] = json!(sol.partition.one_based());
        (sol.assembled_theta, m, sol.converged)
    } else {
        let start = Instant::now();
        let sol = solve_full(&s, lambda, &cfg)?;
        let m = full_metrics(&s, &sol, &cfg, start.elapsed().as_secs_f64());
        let converged = sol.converged;
        (sol.theta, m, converged)
    };
    let mut outputs = Vec::new();
    if let Some(out) = &common.out {
        write_theta(&theta, out, format)?;
        outputs.push(out.display().to_string());
    }
    let code = if converged { EXIT_OK } else { EXIT_SOLVER };
    finish(RunReport { command: "solve".into(), inputs, outputs, metrics }, common, code)
}

fn solver_echo(cfg: &SolverConfig) -> Value {
    json!({
        "kkt_tol": cfg.kkt_tol,
        "conv_tol": cfg.conv_tol,
        "support_tol": cfg.support_tol,
        "max_iter": cfg.max_outer,
    })
}

fn cmd_path(
    path: &Path,
    grid: &GridArgs,
    input: &InputArgs,
    solver: &SolverArgs,
    common: &CommonArgs,
) -> Result<Outcome> {
    configure_threads(common);
    let cfg = solver.config();
    cfg.validate()?;
    let s = load_matrix(path, input)?;
    let lambdas = resolve_grid(&s, grid)?;
    let result = path_solve(&s, &lambdas, &cfg)?;

    let mut outputs = Vec::new();
    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir)?;
    }
    let mut per_lambda = Vec::new();
    let mut all_converged = true;
    for (idx, (lambda, res)) in result.lambdas.iter().zip(&result.solutions).enumerate() {
        match res {
            Ok(sol) => {
                all_converged &= sol.converged;
                let mut entry = serde_json::to_value(LambdaReport::from(sol)).expect("report serializes");
                if let Some(dir) = &common.out {
                    let file = dir.join(format!("theta_{idx:03}.txt"));
                    write_theta(&sol.assembled_theta, &file, Format::Triplet)?;
                    entry["theta_file"] = json!(file.display().to_string());
                    outputs.push(file.display().to_string());
                }
                per_lambda.push(entry);
            }
            Err(e) => {
                all_converged = false;
                per_lambda.push(json!({ "lambda": lambda, "error": e.to_string() }));
            }
        }
    }
    let mut inputs = input_echo(path, input);
    inputs["lambda_grid"] = json!(grid.lambda_grid);
    inputs["p_max"] = json!(grid.p_max);
    inputs["solver"] = solver_echo(&cfg);
    let metrics = json!({
        "lambdas": result.lambdas,
        "partitions_nested": result.partitions_nested,
        "per_lambda": per_lambda,
    });
    let code = if all_converged { EXIT_OK } else { EXIT_SOLVER };
    finish(RunReport { command: "path".into(), inputs, outputs, metrics }, common, code)
}

fn cmd_synth(spec: &SpecArgs, common: &CommonArgs) -> Result<Outcome> {
    let inst = generate(SynthSpec::new(spec.k, spec.p1, spec.seed)?)?;
    let sidecar = SynthSidecar::from(&inst);
    let mut outputs = Vec::new();
    if let Some(out) = &common.out {
        std::fs::write(out, io::format_csv(&inst.s.to_rows()))?;
        let side = sidecar_path(out);
        std::fs::write(&side, serde_json::to_string_pretty(&sidecar).expect("sidecar serializes"))?;
        outputs.push(out.display().to_string());
        outputs.push(side.display().to_string());
    }
    let report = RunReport {
        command: "synth".into(),
        inputs: json!({ "K": spec.k, "p1": spec.p1, "seed": spec.seed }),
        outputs,
        metrics: serde_json::to_value(&sidecar).expect("sidecar serializes"),
    };
    finish(report, common, EXIT_OK)
}

/// `S.csv` -> `S.json`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

/// Screened vs unscreened timing on one synthetic instance.
#[derive(Clone, Debug, Serialize)]
pub struct BenchMetrics {
    #[serde(rename = "K")]
    pub k: usize,
    pub p1: usize,
    pub p: usize,
    pub seed_used: u64,
    pub lambda: f64,
    pub num_components: usize,
    pub max_component: usize,
    pub time_partition_ms: f64,
    pub time_screen_ms: f64,
    pub time_full_ms: f64,
    pub speedup_factor: f64,
    pub objective_screen: f64,
    pub objective_full: f64,
    pub objective_rel_diff: f64,
    pub max_abs_theta_diff: f64,
    pub screen_converged: bool,
    pub full_converged: bool,
}

pub fn bench(spec: SynthSpec, mode_ii: bool, cfg: &SolverConfig) -> Result<BenchMetrics> {
    let inst = generate(spec)?;
    let lambda = if mode_ii { inst.lambda_ii } else { inst.lambda_i };
    let screened = screen_solve(&inst.s, lambda, cfg, None)?;
    let start = Instant::now();
    let full = solve_full(&inst.s, lambda, cfg)?;
    let t_full = start.elapsed().as_secs_f64();
    let t_screen = screened.timings.total().as_secs_f64();
    Ok(BenchMetrics {
        k: spec.k,
        p1: spec.p1,
        p: spec.p(),
        seed_used: inst.seed_used,
        lambda,
        num_components: screened.partition.num_blocks(),
        max_component: screened.partition.max_block_size(),
        time_partition_ms: screened.timings.partition.as_secs_f64() * 1e3,
        time_screen_ms: t_screen * 1e3,
        time_full_ms: t_full * 1e3,
        speedup_factor: t_full / t_screen,
        objective_screen: screened.objective,
        objective_full: full.objective,
        objective_rel_diff: (screened.objective - full.objective).abs() / (1.0 + full.objective.abs()),
        max_abs_theta_diff: screened.assembled_theta.max_abs_diff(&full.theta),
        screen_converged: screened.converged,
        full_converged: full.converged,
    })
}

fn cmd_bench(spec: &SpecArgs, mode: LambdaMode, solver: &SolverArgs, common: &CommonArgs) -> Result<Outcome> {
    configure_threads(common);
    let cfg = solver.config();
    cfg.validate()?;
    let metrics = bench(SynthSpec::new(spec.k, spec.p1, spec.seed)?, mode == LambdaMode::Ii, &cfg)?;
    let report = RunReport {
        command: "bench".into(),
        inputs: json!({
            "K": spec.k,
            "p1": spec.p1,
            "seed": spec.seed,
            "mode": mode,
            "solver": solver_echo(&cfg),
        }),
        outputs: Vec::new(),
        metrics: serde_json::to_value(&metrics).expect("bench serializes"),
    };
    finish(report, common, EXIT_OK)
}
