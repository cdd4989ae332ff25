//! Experiment harness for the `switchprox` solver.
//!
//! Four subcommands cover the full experimental workflow:
//!
//! * `ssm-verify` — runs the inner solver on the closed-form catalog with
//!   its certified iteration budgets and checks the guaranteed accuracy
//!   cell by cell.
//! * `run-spr` — solves one generated sparse phase retrieval instance and
//!   writes the outer trajectory as CSV (plus a `.meta.json` sidecar that
//!   records the run parameters for later aggregation).
//! * `sweep-p` — reruns the experiment across a grid of sparsity budgets
//!   with replicate fan-out, recording where the constraint multiplier
//!   diverges.
//! * `stats` — aggregates trajectory CSVs into median/mean/variance tables
//!   of both stationarity residuals at fixed outer-iteration checkpoints.
//!
//! Every subcommand is deterministic given its seed and spec: repeated
//! invocations produce byte-identical CSV files. Exit status is 0 on
//! success, 1 when a verification assertion fails, and 2 on rejected input.

// Validation deliberately writes `!(x > 0.0)` instead of `x <= 0.0`: the
// negated form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use switchprox::instances::{derive_seed, instance, CatalogId, SprInstance};
use switchprox::numfmt::float17;
use switchprox::oracle::Oracle;
use switchprox::prox::{run, Mode, ProxConfig, Trajectory};
use switchprox::ssm::{self, min_iterations, SsmConfig};

/// Desk-scale defaults: a quarter of the published experiment's size, so a
/// full run takes seconds instead of hours while keeping the same
/// measurement-to-unknown proportions.
const DEFAULT_N: usize = 30;
const DEFAULT_M: usize = 30;
const DEFAULT_NNZ: usize = 8;
const DEFAULT_P: f64 = 24.0;
const DEFAULT_SEED: u64 = 1;
const DEFAULT_EPSILON: f64 = 0.01;
const DEFAULT_RHO: f64 = 3.0;
const DEFAULT_RHO_HAT: f64 = 6.0;
const DEFAULT_OUTER_K: usize = 200;
const DEFAULT_INNER_T: usize = 2000;
const DEFAULT_REPLICATES: usize = 30;

/// Default accuracy grid for `ssm-verify`.
const DEFAULT_TAU_GRID: [f64; 3] = [1e-1, 1e-2, 1e-3];

/// Outer-iteration checkpoints at which `stats` samples the residuals; each
/// defines a subgradient-evaluation budget K·T for the grouping key.
const CHECKPOINT_KS: [usize; 3] = [50, 100, 200];

/// Columns of a trajectory CSV, as written by [`Trajectory::to_csv`].
const TRAJECTORY_HEADER: &str =
    "k,f,g,step_norm,fj_residual,kkt_residual,lambda_hat,gamma0_hat,comp_slack,inner_T,stop_reason";

// ---------------------------------------------------------------------------
// Error handling and exit codes
// ---------------------------------------------------------------------------

enum CliError {
    /// Rejected input: bad flag values, malformed config or CSV, unusable
    /// instance parameters. Exit status 2.
    Input(String),
    /// A verification assertion failed on valid input. Exit status 1.
    Assertion(String),
}

impl From<switchprox::Error> for CliError {
    fn from(err: switchprox::Error) -> Self {
        // Core errors are all rejected inputs or violated preconditions,
        // never internal failures.
        CliError::Input(err.to_string())
    }
}

fn input_err(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "switchprox",
    version,
    about = "Experiment harness for the switching-subgradient proximal solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    shared: SharedArgs,
}

/// Flags shared by every subcommand.
#[derive(Args)]
struct SharedArgs {
    /// Base RNG seed; replicate streams derive from it
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file path (per-subcommand default otherwise)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON config file; explicit flags override its fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for replicate fan-out (default: all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the certified inner-solver budgets on the closed-form catalog
    SsmVerify(SsmVerifyArgs),
    /// Solve one sparse phase retrieval instance and write its trajectory
    RunSpr(RunSprArgs),
    /// Sweep the sparsity budget, recording final multiplier statistics
    SweepP(SweepPArgs),
    /// Aggregate trajectory CSVs into residual statistics by (p, T, K·T)
    Stats(StatsArgs),
}

#[derive(Args)]
struct SsmVerifyArgs {
    /// Catalog instance id (quad1d, quad2d, unbounded); default: all three
    #[arg(long)]
    id: Option<String>,
    /// Accuracy targets to verify (comma-separated or repeated)
    #[arg(long, value_delimiter = ',')]
    tau: Option<Vec<f64>>,
}

/// Instance and solver flags shared by `run-spr` and `sweep-p`.
#[derive(Args)]
struct SolverArgs {
    /// Number of unknowns
    #[arg(long)]
    n: Option<usize>,
    /// Number of measurements
    #[arg(long)]
    m: Option<usize>,
    /// Planted support size
    #[arg(long)]
    nnz: Option<usize>,
    /// Target stationarity accuracy ε
    #[arg(long)]
    epsilon: Option<f64>,
    /// Weak-convexity modulus recorded on the instance
    #[arg(long)]
    rho: Option<f64>,
    /// Proximal weight ρ̂
    #[arg(long)]
    rho_hat: Option<f64>,
    /// Outer iteration budget K
    #[arg(long)]
    outer_k: Option<usize>,
    /// Inner iteration budget T per outer step
    #[arg(long)]
    inner_t: Option<usize>,
    /// Stationarity notion for the schedule: fj or kkt
    #[arg(long)]
    mode: Option<String>,
    /// Constraint-qualification modulus σ (required in kkt mode)
    #[arg(long)]
    sigma: Option<f64>,
}

#[derive(Args)]
struct RunSprArgs {
    #[command(flatten)]
    solver: SolverArgs,
    /// SCAD sparsity budget p
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Args)]
struct SweepPArgs {
    #[command(flatten)]
    solver: SolverArgs,
    /// Budget grid (comma-separated or repeated)
    #[arg(long, value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,
    /// Replicates per grid point
    #[arg(long)]
    replicates: Option<usize>,
}

#[derive(Args)]
struct StatsArgs {
    /// Trajectory CSV files written by run-spr (each with its sidecar)
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

// ---------------------------------------------------------------------------
// JSON config documents (one per run spec; flags override fields)
// ---------------------------------------------------------------------------

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct SsmVerifyConfig {
    id: Option<String>,
    tau: Option<Vec<f64>>,
    out: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct SolverConfig {
    n: Option<usize>,
    m: Option<usize>,
    nnz: Option<usize>,
    epsilon: Option<f64>,
    rho: Option<f64>,
    rho_hat: Option<f64>,
    outer_k: Option<usize>,
    inner_t: Option<usize>,
    mode: Option<String>,
    sigma: Option<f64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    workers: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RunSprConfig {
    #[serde(flatten)]
    solver: SolverConfig,
    p: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct SweepPConfig {
    #[serde(flatten)]
    solver: SolverConfig,
    p_grid: Option<Vec<f64>>,
    replicates: Option<usize>,
}

fn load_config<T: serde::de::DeserializeOwned + Default>(
    path: Option<&Path>,
) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| input_err(format!("config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input_err(format!("config {}: {e}", path.display())))
}

/// Solver parameters after merging flags, config, and defaults.
#[derive(Serialize)]
struct ResolvedSolver {
    n: usize,
    m: usize,
    nnz: usize,
    seed: u64,
    epsilon: f64,
    rho: f64,
    rho_hat: f64,
    outer_k: usize,
    inner_t: usize,
    mode: String,
    sigma: Option<f64>,
}

impl ResolvedSolver {
    fn merge(args: &SolverArgs, cfg: &SolverConfig, shared: &SharedArgs) -> Self {
        ResolvedSolver {
            n: args.n.or(cfg.n).unwrap_or(DEFAULT_N),
            m: args.m.or(cfg.m).unwrap_or(DEFAULT_M),
            nnz: args.nnz.or(cfg.nnz).unwrap_or(DEFAULT_NNZ),
            seed: shared.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED),
            epsilon: args.epsilon.or(cfg.epsilon).unwrap_or(DEFAULT_EPSILON),
            rho: args.rho.or(cfg.rho).unwrap_or(DEFAULT_RHO),
            rho_hat: args.rho_hat.or(cfg.rho_hat).unwrap_or(DEFAULT_RHO_HAT),
            outer_k: args.outer_k.or(cfg.outer_k).unwrap_or(DEFAULT_OUTER_K),
            inner_t: args.inner_t.or(cfg.inner_t).unwrap_or(DEFAULT_INNER_T),
            mode: args
                .mode
                .clone()
                .or_else(|| cfg.mode.clone())
                .unwrap_or_else(|| "fj".to_string()),
            sigma: args.sigma.or(cfg.sigma),
        }
    }

    fn prox_config(&self) -> Result<ProxConfig, CliError> {
        let mode = Mode::from_str(&self.mode)?;
        Ok(ProxConfig {
            rho_hat: self.rho_hat,
            epsilon: self.epsilon,
            mode,
            sigma: self.sigma,
            max_outer: self.outer_k,
            inner_override: Some(self.inner_t),
            tau_override: None,
        })
    }

    /// Generates the instance for one replicate seed and runs the solver.
    fn solve_instance(&self, instance_seed: u64, p: f64) -> Result<Trajectory, CliError> {
        let mut inst = SprInstance::generate(self.n, self.m, self.nnz, p, instance_seed)?;
        inst.rho = self.rho;
        inst.rho_hat = self.rho_hat;
        let problem = inst.problem()?;
        let x0 = inst.default_x0()?;
        Ok(run(&problem, &self.prox_config()?, &x0)?)
    }
}

// ---------------------------------------------------------------------------
// ssm-verify
// ---------------------------------------------------------------------------

fn cmd_ssm_verify(args: &SsmVerifyArgs, shared: &SharedArgs) -> Result<(), CliError> {
    let cfg: SsmVerifyConfig = load_config(shared.config.as_deref())?;
    let ids: Vec<CatalogId> = match args.id.as_ref().or(cfg.id.as_ref()) {
        Some(name) => vec![CatalogId::from_str(name)?],
        None => CatalogId::all().to_vec(),
    };
    let taus = args
        .tau
        .clone()
        .or(cfg.tau)
        .unwrap_or_else(|| DEFAULT_TAU_GRID.to_vec());
    for &tau in &taus {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(input_err(format!(
                "tau must be finite and > 0, got {tau:e}"
            )));
        }
    }

    let mut csv = String::from("id,tau,T,gap,g_bar,pass\n");
    let mut failures = Vec::new();
    for &id in &ids {
        let ci = instance(id);
        for &tau in &taus {
            let iters = min_iterations(ci.l0sq, ci.l1, ci.mu, tau, ci.dist0)?;
            let ssm_config = SsmConfig {
                tau,
                max_iters: iters,
                mu: ci.mu,
                l1: ci.l1,
                record_trajectory: false,
            };
            let out = ssm::solve(&*ci.objective, &*ci.constraint, &ci.domain, &ci.z0, &ssm_config)?;
            let (f_bar, _) = ci.objective.eval(&out.z_bar);
            let (g_bar, _) = ci.constraint.eval(&out.z_bar);
            let gap = f_bar - ci.f_star;
            let pass = gap <= tau && g_bar <= tau;
            println!(
                "{id} tau={tau:e} T={iters} gap={gap:e} g_bar={g_bar:e} {}",
                if pass { "pass" } else { "FAIL" }
            );
            csv.push_str(&format!(
                "{id},{},{iters},{},{},{}\n",
                float17(tau),
                float17(gap),
                float17(g_bar),
                pass
            ));
            if !pass {
                failures.push(format!("{id} tau={tau:e}"));
            }
        }
    }
    if let Some(out) = shared.out.as_ref().or(cfg.out.as_ref()) {
        write_file(out, &csv)?;
        println!("wrote {}", out.display());
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Assertion(format!(
            "{} of {} cells failed the certified-accuracy check: {}",
            failures.len(),
            ids.len() * taus.len(),
            failures.join(", ")
        )))
    }
}

// ---------------------------------------------------------------------------
// run-spr
// ---------------------------------------------------------------------------

/// Sidecar document written next to each trajectory CSV so aggregation can
/// recover the run parameters without re-parsing flags.
#[derive(Serialize)]
struct RunMeta<'a> {
    #[serde(flatten)]
    solver: &'a ResolvedSolver,
    p: f64,
    tau: f64,
    stop_reason: &'a str,
}

fn meta_path(out: &Path) -> PathBuf {
    PathBuf::from(format!("{}.meta.json", out.display()))
}

fn cmd_run_spr(args: &RunSprArgs, shared: &SharedArgs) -> Result<(), CliError> {
    let cfg: RunSprConfig = load_config(shared.config.as_deref())?;
    let solver = ResolvedSolver::merge(&args.solver, &cfg.solver, shared);
    let p = args.p.or(cfg.p).unwrap_or(DEFAULT_P);
    let out = shared
        .out
        .clone()
        .or(cfg.solver.out)
        .unwrap_or_else(|| PathBuf::from("trajectory.csv"));

    let traj = solver.solve_instance(solver.seed, p)?;
    write_file(&out, &traj.to_csv())?;
    let meta = RunMeta {
        solver: &solver,
        p,
        tau: traj.params.tau,
        stop_reason: traj.stop_reason.label(),
    };
    let meta_text = serde_json::to_string_pretty(&meta)
        .expect("run metadata serializes") + "\n";
    let meta_file = meta_path(&out);
    write_file(&meta_file, &meta_text)?;

    let fin = traj.final_record();
    println!("wrote {} ({} rows)", out.display(), traj.records.len());
    println!("wrote {}", meta_file.display());
    println!("stop_reason: {}", traj.stop_reason);
    println!("completed_outer_iters: {}", traj.completed_outer_iters());
    println!("final_f: {}", float17(fin.f_value));
    println!("final_g: {}", float17(fin.g_value));
    println!("final_fj_residual: {}", float17(fin.fj.residual));
    println!("final_kkt_residual: {}", float17(fin.kkt.residual));
    println!("final_lambda_hat: {}", float17(fin.kkt.lambda));
    println!("subgradient_evals: {}", traj.subgradient_evals);
    println!("oracle_calls: {}", traj.oracle_calls);
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep-p
// ---------------------------------------------------------------------------

fn cmd_sweep_p(args: &SweepPArgs, shared: &SharedArgs) -> Result<(), CliError> {
    let cfg: SweepPConfig = load_config(shared.config.as_deref())?;
    let solver = ResolvedSolver::merge(&args.solver, &cfg.solver, shared);
    let grid = args
        .p_grid
        .clone()
        .or(cfg.p_grid)
        .unwrap_or_else(|| (21..=33).map(f64::from).collect());
    let replicates = args
        .replicates
        .or(cfg.replicates)
        .unwrap_or(DEFAULT_REPLICATES);
    let workers = shared.workers.or(cfg.solver.workers);
    let out = shared
        .out
        .clone()
        .or(cfg.solver.out)
        .unwrap_or_else(|| PathBuf::from("sweep.csv"));

    if grid.is_empty() {
        return Err(input_err("p grid must be nonempty"));
    }
    if replicates == 0 {
        return Err(input_err("replicate count must be at least 1"));
    }
    if workers == Some(0) {
        return Err(input_err("worker count must be at least 1"));
    }
    solver.prox_config()?; // validate solver parameters before fanning out

    // One job per (grid point, replicate). Replicate r draws its instance
    // from the stream derive_seed(seed, r) at every p, so the measurement
    // data is held fixed along the grid and only the budget moves.
    let jobs: Vec<(usize, u64)> = (0..grid.len())
        .flat_map(|pi| (0..replicates as u64).map(move |r| (pi, r)))
        .collect();
    let run_job = |&(pi, r): &(usize, u64)| -> Result<(f64, bool), CliError> {
        let traj = solver.solve_instance(derive_seed(solver.seed, r), grid[pi])?;
        let fin = traj.final_record();
        Ok((fin.kkt.lambda, fin.kkt.lambda_at_cap))
    };
    // Indexed collect keeps results in job order regardless of worker count
    // or scheduling, so the emitted CSV is byte-identical across pool sizes.
    let results: Result<Vec<(f64, bool)>, CliError> = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| input_err(format!("worker pool: {e}")))?
            .install(|| jobs.par_iter().map(run_job).collect()),
        None => jobs.par_iter().map(run_job).collect(),
    };
    let results = results?;

    let mut csv = String::from("p,lambda_mean,lambda_min,lambda_max,diverged,replicates\n");
    for (pi, &p) in grid.iter().enumerate() {
        let cell = &results[pi * replicates..(pi + 1) * replicates];
        let mut sum = 0.0;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut diverged = 0usize;
        for &(lambda, at_cap) in cell {
            sum += lambda;
            min = min.min(lambda);
            max = max.max(lambda);
            diverged += usize::from(at_cap);
        }
        csv.push_str(&format!(
            "{},{},{},{},{diverged},{replicates}\n",
            float17(p),
            float17(sum / replicates as f64),
            float17(min),
            float17(max),
        ));
    }
    write_file(&out, &csv)?;
    println!("wrote {} ({} grid points x {} replicates)", out.display(), grid.len(), replicates);
    Ok(())
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

/// The per-row fields `stats` consumes from a trajectory CSV.
struct TrajectoryRow {
    k: usize,
    fj_residual: f64,
    kkt_residual: f64,
    inner_t: usize,
}

#[derive(Deserialize)]
struct MetaDoc {
    p: f64,
}

fn parse_field<T: FromStr>(
    raw: &str,
    what: &str,
    file: &Path,
    line_no: usize,
) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    raw.parse().map_err(|e| {
        input_err(format!(
            "{}:{line_no}: bad {what} value {raw:?}: {e}",
            file.display()
        ))
    })
}

fn parse_trajectory(file: &Path) -> Result<Vec<TrajectoryRow>, CliError> {
    let text = fs::read_to_string(file)
        .map_err(|e| input_err(format!("{}: {e}", file.display())))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line_no == 1 {
            if line != TRAJECTORY_HEADER {
                return Err(input_err(format!(
                    "{}:1: not a trajectory CSV (unexpected header)",
                    file.display()
                )));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let expected = TRAJECTORY_HEADER.split(',').count();
        if fields.len() != expected {
            return Err(input_err(format!(
                "{}:{line_no}: expected {expected} fields, found {}",
                file.display(),
                fields.len()
            )));
        }
        rows.push(TrajectoryRow {
            k: parse_field(fields[0], "k", file, line_no)?,
            fj_residual: parse_field(fields[4], "fj_residual", file, line_no)?,
            kkt_residual: parse_field(fields[5], "kkt_residual", file, line_no)?,
            inner_t: parse_field(fields[9], "inner_T", file, line_no)?,
        });
    }
    if rows.is_empty() {
        return Err(input_err(format!(
            "{}: no data rows",
            file.display()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.k != i {
            return Err(input_err(format!(
                "{}:{}: iterate index {} out of sequence (expected {i})",
                file.display(),
                i + 2,
                row.k
            )));
        }
    }
    Ok(rows)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance (divisor R−1); zero for a single sample.
fn variance(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64
}

/// Aggregation key: (p, inner T, K·T subgradient budget).
type GroupKey = (f64, usize, u64);
/// Residual samples per group: one (balanced, multiplier) pair per run.
type GroupSamples = (Vec<f64>, Vec<f64>);

fn cmd_stats(args: &StatsArgs, shared: &SharedArgs) -> Result<(), CliError> {
    // One sample per run per checkpoint, taken at the checkpoint row
    // (clamped to the final row when the run stopped before it).
    let mut groups: Vec<(GroupKey, GroupSamples)> = Vec::new();
    for file in &args.files {
        let rows = parse_trajectory(file)?;
        let meta_file = meta_path(file);
        let meta_text = fs::read_to_string(&meta_file).map_err(|e| {
            input_err(format!(
                "{}: {e} (trajectories written by run-spr carry this sidecar)",
                meta_file.display()
            ))
        })?;
        let meta: MetaDoc = serde_json::from_str(&meta_text)
            .map_err(|e| input_err(format!("{}: {e}", meta_file.display())))?;
        let inner_t = rows[0].inner_t;
        for &k in &CHECKPOINT_KS {
            let row = &rows[k.min(rows.len() - 1)];
            let key = (meta.p, inner_t, (k as u64) * (inner_t as u64));
            let entry = match groups.iter_mut().find(|(g, _)| *g == key) {
                Some((_, entry)) => entry,
                None => {
                    groups.push((key, (Vec::new(), Vec::new())));
                    &mut groups.last_mut().expect("just pushed").1
                }
            };
            entry.0.push(row.fj_residual);
            entry.1.push(row.kkt_residual);
        }
    }
    groups.sort_by(|((pa, ta, ka), _), ((pb, tb, kb), _)| {
        pa.total_cmp(pb).then(ta.cmp(tb)).then(ka.cmp(kb))
    });

    let mut csv = String::from(
        "p,inner_t,kt_budget,runs,fj_median,fj_mean,fj_var,kkt_median,kkt_mean,kkt_var\n",
    );
    for ((p, inner_t, kt), (mut fj, mut kkt)) in groups {
        let runs = fj.len();
        let fj_median = median(&mut fj);
        let fj_mean = mean(&fj);
        let kkt_median = median(&mut kkt);
        let kkt_mean = mean(&kkt);
        csv.push_str(&format!(
            "{},{inner_t},{kt},{runs},{},{},{},{},{},{}\n",
            float17(p),
            float17(fj_median),
            float17(fj_mean),
            float17(variance(&fj, fj_mean)),
            float17(kkt_median),
            float17(kkt_mean),
            float17(variance(&kkt, kkt_mean)),
        ));
    }

    match &shared.out {
        Some(out) => {
            write_file(out, &csv)?;
            println!("wrote {}", out.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::SsmVerify(args) => cmd_ssm_verify(args, &cli.shared),
        Command::RunSpr(args) => cmd_run_spr(args, &cli.shared),
        Command::SweepP(args) => cmd_sweep_p(args, &cli.shared),
        Command::Stats(args) => cmd_stats(args, &cli.shared),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Assertion(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
