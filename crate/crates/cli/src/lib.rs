//! Batch driver for `freebound-core`: simulations, eigenvalue queries,
//! classification, threshold scans, phase sweeps and super-solution checks.
//!
//! Config-driven subcommands read a flat document of dotted keys
//! (`model.d1 = 1.0`) and write their files to the output directory; every
//! JSON summary embeds the fully resolved config, and passing that summary
//! back as `--config` reproduces the run exactly.

pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use freebound_core::classify::{
    build_predation_supersolution, build_vanishing_supersolution, check_domination, estimate_threshold, sweep,
    Classifier,
};
use freebound_core::eigen::{critical_length, lambda_p, EigenProblem};
use freebound_core::{run, InteractionKind, Kernel, KernelFamily, Trajectory, Verdict};
use serde_json::{json, Value};

pub use config::{parse_config, RunConfig};
pub use error::{exit, CliError};

#[derive(Debug, Parser)]
#[command(name = "freebound", version, about = "Nonlocal-local free boundary simulations and diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one trajectory; writes trajectory.csv and summary.json.
    Simulate(ConfigArgs),
    /// Principal eigenvalue on an interval of the given length.
    Eigen(EigenArgs),
    /// Interval length at which the principal eigenvalue vanishes.
    CriticalLength(CriticalLengthArgs),
    /// Simulate, then classify as spreading, vanishing or undecided.
    Classify(ConfigArgs),
    /// Bracket the front-budget threshold along a ray in the (mu, rho) plane.
    Threshold(WorkerArgs),
    /// Classify every cell of the swept grid; writes phase.csv.
    Sweep(WorkerArgs),
    /// Compare a run against the closed-form upper solution.
    SupersolutionCheck(ConfigArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Config document, or a summary JSON emitted by an earlier run.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides FREEBOUND_OUTPUT_DIR and output.dir).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WorkerArgs {
    #[command(flatten)]
    pub common: ConfigArgs,
    /// Worker threads (overrides the config; 0 uses every core).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long, default_value = "tent")]
    pub family: KernelFamily,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[arg(long)]
    pub d: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub theta0: f64,
    #[arg(long)]
    pub length: f64,
    /// Node count; defaults to a spacing of R/32.
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    pub kernel: KernelArgs,
}

#[derive(Debug, Args)]
pub struct CriticalLengthArgs {
    #[arg(long)]
    pub d1: f64,
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[command(flatten)]
    pub kernel: KernelArgs,
}

/// Result of a subcommand: the JSON record for stdout and the exit status.
#[derive(Debug)]
pub struct Outcome {
    pub record: Value,
    pub code: u8,
}

impl Outcome {
    fn ok(record: Value) -> Self {
        Outcome { record, code: exit::OK }
    }
}

/// Parses arguments, dispatches, prints the record (stdout) or the error
/// (stderr, as JSON), and returns the exit status.
pub fn main_with<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return exit::OK;
        }
        Err(e) => {
            let err = json!({ "error": "usage", "message": e.to_string().trim_end(), "exit_code": exit::CONFIG });
            eprintln!("{err}");
            return exit::CONFIG;
        }
    };
    match dispatch(&cli.command) {
        Ok(out) => {
            println!("{}", serde_json::to_string_pretty(&out.record).expect("records serialize"));
            out.code
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

pub fn dispatch(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Eigen(a) => eigen(a),
        Command::CriticalLength(a) => critical(a),
        Command::Classify(a) => classify(a),
        Command::Threshold(a) => threshold(a),
        Command::Sweep(a) => phase_sweep(a),
        Command::SupersolutionCheck(a) => supersolution_check(a),
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

fn summary(command: &str, cfg: &RunConfig) -> Value {
    json!({ "command": command, "config": cfg })
}

fn emit(args: &ConfigArgs, cfg: &RunConfig, files: &[(&str, String)]) -> Result<Vec<String>, CliError> {
    let dir = output::output_dir(args.output.as_deref(), &cfg.output.dir);
    let written = output::write_all(&dir, files)?;
    Ok(written.iter().map(|p| p.display().to_string()).collect())
}

fn trajectory_files(traj: &Trajectory) -> Vec<(&'static str, String)> {
    let mut files = vec![("trajectory.csv", traj.to_csv())];
    if !traj.snapshots.is_empty() {
        let (x, u, v) = traj.snapshot_csv();
        files.extend([("snapshots_x.csv", x), ("snapshots_u.csv", u), ("snapshots_v.csv", v)]);
    }
    files
}

fn final_record(traj: &Trajectory) -> Value {
    let last = traj.last();
    json!({
        "t": last.t,
        "g": last.g,
        "h": last.h,
        "gdot": last.gdot,
        "hdot": last.hdot,
        "sup_u": last.sup_u,
        "sup_v": last.sup_v,
        "steps": traj.steps,
        "termination": traj.termination,
    })
}

fn simulate(args: &ConfigArgs) -> Result<Outcome, CliError> {
    let cfg = load_config(&args.config)?;
    let traj = run(&cfg.params()?, &cfg.initial_data()?, &cfg.kernel()?, &cfg.run_control())?;
    let mut record = summary("simulate", &cfg);
    record["final"] = final_record(&traj);
    record["regime"] = json!(cfg.regime_notes());
    let mut files = trajectory_files(&traj);
    files.push(("summary.json", pretty(&record)));
    record["files"] = json!(emit(args, &cfg, &files)?);
    Ok(Outcome::ok(record))
}

fn classify(args: &ConfigArgs) -> Result<Outcome, CliError> {
    let cfg = load_config(&args.config)?;
    let (traj, class) = Classifier::new().run_and_classify(
        &cfg.params()?,
        &cfg.initial_data()?,
        &cfg.kernel()?,
        &cfg.run_control(),
        &cfg.classify_options(),
    )?;
    let mut record = summary("classify", &cfg);
    record["final"] = final_record(&traj);
    record["regime"] = json!(cfg.regime_notes());
    record["classification"] = json!(class);
    let mut files = trajectory_files(&traj);
    files.push(("classification.json", pretty(&record)));
    record["files"] = json!(emit(args, &cfg, &files)?);
    let code = if class.verdict == Verdict::Undecided { exit::INCONCLUSIVE } else { exit::OK };
    Ok(Outcome { record, code })
}

fn threshold(args: &WorkerArgs) -> Result<Outcome, CliError> {
    let cfg = load_config(&args.common.config)?;
    let mut ctrl = cfg.threshold_control();
    if let Some(w) = args.workers.filter(|&w| w > 0) {
        ctrl.workers = w;
    }
    let ray = (cfg.threshold.ray_mu, cfg.threshold.ray_rho);
    let est = estimate_threshold(&cfg.params()?, &cfg.initial_data()?, &cfg.kernel()?, ray, &ctrl)?;
    let mut record = summary("threshold", &cfg);
    record["estimate"] = json!(est);
    let files = [("threshold.json", pretty(&record))];
    record["files"] = json!(emit(&args.common, &cfg, &files)?);
    Ok(Outcome::ok(record))
}

fn phase_sweep(args: &WorkerArgs) -> Result<Outcome, CliError> {
    let cfg = load_config(&args.common.config)?;
    let workers = match args.workers.unwrap_or(cfg.sweep.workers) {
        0 => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        w => w,
    };
    let table = sweep(&cfg.phase_plan(), workers)?;
    let failures: Vec<Value> = table
        .rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().err().map(|e| json!({ "cell": r.cell, "error": e })))
        .collect();
    let mut record = summary("sweep", &cfg);
    record["cells"] = json!(table.rows.len());
    record["counts"] = json!(table.counts());
    record["failures"] = json!(failures);
    let files = [("phase.csv", table.to_csv()), ("sweep.json", pretty(&record))];
    record["files"] = json!(emit(&args.common, &cfg, &files)?);
    Ok(Outcome::ok(record))
}

fn supersolution_check(args: &ConfigArgs) -> Result<Outcome, CliError> {
    let cfg = load_config(&args.config)?;
    let h1 = cfg
        .supersolution
        .h1
        .ok_or_else(|| CliError::field("supersolution.h1", "is required for supersolution-check"))?;
    let (p, init, k) = (cfg.params()?, cfg.initial_data()?, cfg.kernel()?);
    let upper = match p.kind {
        InteractionKind::Competition => build_vanishing_supersolution(&p, &init, &k, h1)?,
        InteractionKind::Predation => build_predation_supersolution(&p, &init, &k, h1)?,
    };
    let mut ctrl = cfg.run_control();
    ctrl.snapshot_interval.get_or_insert(ctrl.sample_interval);
    let traj = run(&p, &init, &k, &ctrl)?;
    let report = check_domination(&upper, &traj, cfg.supersolution.tol)?;
    let mut record = summary("supersolution-check", &cfg);
    record["front_budget"] = json!(p.mu + p.rho);
    record["lambda0"] = json!(upper.lambda0);
    record["admissible"] = json!(upper.admissible());
    record["lambda_p"] = json!(upper.lambda);
    record["constants"] = json!(upper.constants);
    record["report"] = json!(report);
    let files = [("domination.json", pretty(&record))];
    record["files"] = json!(emit(args, &cfg, &files)?);
    let code = if report.dominated { exit::OK } else { exit::INCONCLUSIVE };
    Ok(Outcome { record, code })
}

fn eigen(args: &EigenArgs) -> Result<Outcome, CliError> {
    let kernel = Kernel::new(args.kernel.family, args.kernel.radius)?;
    let interval = (0.0, args.length);
    let prob = match args.n {
        Some(n) => EigenProblem::new(args.d, args.theta0, interval, n, kernel)?,
        None => EigenProblem::resolved(args.d, args.theta0, interval, kernel)?,
    };
    let res = lambda_p(&prob)?;
    Ok(Outcome::ok(json!({
        "lambda_p": res.lambda_p,
        "residual": res.residual,
        "iterations": res.iterations,
        "n": prob.n,
        "length": args.length,
    })))
}

fn critical(args: &CriticalLengthArgs) -> Result<Outcome, CliError> {
    let kernel = Kernel::new(args.kernel.family, args.kernel.radius)?;
    let c = critical_length(args.d1, args.a, &kernel, args.tol)?;
    Ok(Outcome::ok(json!({
        "ell_star": c.ell_star,
        "lambda_at_ell_star": c.lambda_at_ell_star,
        "bracket": [c.bracket.0, c.bracket.1],
        "n": c.n,
    })))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("records serialize");
    s.push('\n');
    s
}
