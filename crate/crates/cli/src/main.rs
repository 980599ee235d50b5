//! `gkura`: run gated Kuramoto simulations, locked-state solves, Poincaré
//! classifications, sweeps and figure bundles from a JSON config.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gated_kuramoto::analysis::{classify_locking, convergence_time};
use gated_kuramoto::harness::{
    atomic_write, robustness_sweep_k_n, run_experiment, run_experiment_resumable, run_figure, write_rows_csv,
    Execution, FigureId, ROBUSTNESS_K, ROBUSTNESS_N,
};
use gated_kuramoto::locked::{
    classical_locked_state, continue_in_width, solve_locked, stability, LockedReport, SolverOptions,
};
use gated_kuramoto::Error;
use serde_json::json;

use config::{RunConfig, RunKind};

#[derive(Parser, Debug)]
#[command(name = "gkura", version, about = "Gated Kuramoto oscillators: simulation, locked states and sweeps")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override a config value, e.g. `--set gate.w=2.0` (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (1 runs sequentially).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Seed for random initial phases and derived sweep seeds.
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one run and write trajectory.csv and summary.json.
    Simulate,
    /// Solve for the locked state and its stability; writes locked.json.
    Locked,
    /// Section at the mean phase and classify locking; writes poincare.csv and verdict.json.
    Poincare,
    /// Run a parameter sweep; writes sweep.csv.
    Sweep {
        /// sweep-convergence, sweep-poincare or robustness (default: run.kind,
        /// falling back to sweep-convergence).
        #[arg(long)]
        kind: Option<String>,
    },
    /// Regenerate a figure's data bundle: fig2, fig4, fig5 or figS1.
    Figures { id: String },
}

/// Failure categories mapped onto exit codes.
enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
    PartialSweep(usize, usize),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::PartialSweep(..) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Io(m) => write!(f, "{m}"),
            Failure::PartialSweep(bad, total) => write!(f, "{bad} of {total} sweep points failed"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::PreconditionViolated(_) => Failure::Config(e.to_string()),
            Error::Io(_) => Failure::Io(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(format!("i/o error: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("gkura: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let mut overrides = Vec::new();
    if let Some(out) = &cli.out {
        overrides.push(format!("run.out={}", json!(out.to_string_lossy())));
    }
    if let Some(j) = cli.jobs {
        overrides.push(format!("run.jobs={j}"));
    }
    if let Some(s) = cli.seed {
        overrides.push(format!("init.seed={s}"));
    }
    let kind = match &cli.command {
        Command::Simulate => Some(RunKind::Simulate),
        Command::Locked => Some(RunKind::Locked),
        Command::Poincare => Some(RunKind::Poincare),
        Command::Sweep { kind: Some(k) } => Some(parse_sweep_kind(k)?),
        Command::Sweep { kind: None } | Command::Figures { .. } => None,
    };
    // Command-line flags are applied after the file's own `--set`s so they win.
    let mut all = cli.set.clone();
    all.extend(overrides);
    let text = match &cli.config {
        Some(p) => Some(
            std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("cannot read {}: {e}", p.display())))?,
        ),
        None => None,
    };
    let mut cfg = config::resolve(text.as_deref(), &all).map_err(Failure::Config)?;
    if let Some(k) = kind {
        cfg.run.kind = k;
    } else if matches!(cli.command, Command::Sweep { .. })
        && !matches!(cfg.run.kind, RunKind::SweepConvergence | RunKind::SweepPoincare | RunKind::Robustness)
    {
        cfg.run.kind = RunKind::SweepConvergence;
    }

    match &cli.command {
        Command::Figures { id } => figures(&cfg, id),
        Command::Simulate => simulate(&cfg),
        Command::Locked => locked(&cfg),
        Command::Poincare => poincare(&cfg),
        Command::Sweep { .. } => sweep(&cfg),
    }
}

fn parse_sweep_kind(s: &str) -> CliResult<RunKind> {
    match s {
        "sweep-convergence" => Ok(RunKind::SweepConvergence),
        "sweep-poincare" => Ok(RunKind::SweepPoincare),
        "robustness" => Ok(RunKind::Robustness),
        other => Err(Failure::Config(format!(
            "unknown sweep kind {other:?} (expected sweep-convergence, sweep-poincare or robustness)"
        ))),
    }
}

fn execution(cfg: &RunConfig) -> Execution {
    match cfg.run.jobs {
        Some(1) => Execution::Sequential,
        Some(n) => Execution::ParallelJobs(n),
        None => Execution::Parallel,
    }
}

fn config_json(cfg: &RunConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config serializes")
}

/// Creates the output directory and records the resolved configuration in it.
fn prepare_out(cfg: &RunConfig) -> CliResult<&Path> {
    let dir = cfg.run.out.as_path();
    std::fs::create_dir_all(dir)?;
    write_json(&dir.join("config.json"), &config_json(cfg))?;
    Ok(dir)
}

fn write_json(path: &Path, v: &serde_json::Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(v).expect("json value serializes");
    text.push('\n');
    atomic_write(path, text.as_bytes())?;
    Ok(())
}

fn simulate(cfg: &RunConfig) -> CliResult<()> {
    let pc = cfg.point();
    pc.validate()?;
    let dir = prepare_out(cfg)?;
    let traj = pc.simulate()?;
    atomic_write(&dir.join("trajectory.csv"), traj.to_csv_string().as_bytes())?;
    let summary = json!({
        "final_r": traj.final_r(),
        "t_conv": convergence_time(&traj, cfg.run.tol),
        "tol": cfg.run.tol,
        "samples": traj.len(),
        "steps_accepted": traj.stats.accepted,
        "steps_rejected": traj.stats.rejected,
        "rhs_evaluations": traj.stats.evaluations,
        "config": config_json(cfg),
    });
    write_json(&dir.join("summary.json"), &summary)?;
    println!("final R = {:.10}", traj.final_r());
    Ok(())
}

fn poincare(cfg: &RunConfig) -> CliResult<()> {
    let pc = cfg.point();
    pc.validate()?;
    let dir = prepare_out(cfg)?;
    let rec = pc.poincare_record()?;
    let mut buf = Vec::new();
    rec.write_csv(&mut buf)?;
    atomic_write(&dir.join("poincare.csv"), &buf)?;
    let v = classify_locking(&rec, cfg.run.lock_tol, cfg.run.drift_tol);
    let verdict = v.to_json(&json!({
        "transient_cut": rec.transient_cut,
        "lock_tol": cfg.run.lock_tol,
        "drift_tol": cfg.run.drift_tol,
        "steady_gap": rec.steady_gap(0),
        "config": config_json(cfg),
    }));
    write_json(&dir.join("verdict.json"), &verdict)?;
    println!("{} (spread {:.3e}, {} crossings)", verdict["kind"].as_str().unwrap_or("?"), v.spread, v.n_crossings);
    Ok(())
}

fn locked(cfg: &RunConfig) -> CliResult<()> {
    let pc = cfg.point();
    pc.validate()?;
    let model = pc.model_config()?;
    let dir = prepare_out(cfg)?;
    let opts = SolverOptions::default();
    let profile = if model.gate.enabled {
        continue_in_width(&model, &[model.gate.w], &opts)?
            .pop()
            .expect("one width requested")
            .profile?
    } else {
        let guess = classical_locked_state(&model.omega, model.coupling)
            .unwrap_or_else(|| (vec![0.0; model.n()], model.mean_frequency()));
        solve_locked(&model, (&guess.0, guess.1), &opts)?
    };
    let report = if profile.converged { Some(stability(&model, &profile)?) } else { None };
    let out = LockedReport::new(&profile, report.as_ref());
    let mut doc = serde_json::to_value(&out).expect("report serializes");
    doc["config"] = config_json(cfg);
    write_json(&dir.join("locked.json"), &doc)?;
    if !profile.converged {
        return Err(Failure::Numerical(format!("locked solve did not converge (residual {:e})", profile.residual)));
    }
    println!("Omega = {:.12}, verdict {:?}", out.omega, out.verdict);
    Ok(())
}

fn sweep(cfg: &RunConfig) -> CliResult<()> {
    let exec = execution(cfg);
    if cfg.run.kind == RunKind::Robustness {
        let base = cfg.point();
        base.validate()?;
        let ks = cfg.run.k_values.clone().unwrap_or_else(|| ROBUSTNESS_K.to_vec());
        let ns = cfg.run.n_values.clone().unwrap_or_else(|| ROBUSTNESS_N.to_vec());
        if cfg.run.widths.is_empty() || ks.is_empty() || ns.is_empty() {
            return Err(Failure::Config("robustness needs non-empty widths, k_values and N_values".into()));
        }
        let dir = prepare_out(cfg)?;
        let res = robustness_sweep_k_n(&base, &ks, &ns, &cfg.run.widths, cfg.init.seed, exec)?;
        let rows: Vec<_> = res.rows_k.iter().chain(&res.rows_n).cloned().collect();
        write_rows_csv(&dir.join("sweep.csv"), &rows)?;
        atomic_write(&dir.join("robustness_curves.csv"), res.curves_csv().as_bytes())?;
        let bad = rows.iter().filter(|r| r.outcome.error.is_some()).count();
        println!("{} points, {bad} failed", rows.len());
        return if bad > 0 { Err(Failure::PartialSweep(bad, rows.len())) } else { Ok(()) };
    }
    let spec = cfg.sweep_spec();
    spec.validate()?;
    let dir = prepare_out(cfg)?;
    let res = match &cfg.run.checkpoint {
        Some(cp) => run_experiment_resumable(&spec, exec, cp, None)?,
        None => run_experiment(&spec, exec)?,
    };
    write_rows_csv(&dir.join("sweep.csv"), &res.rows)?;
    let bad = res.failed_rows();
    println!("{} points, {bad} failed", res.rows.len());
    if bad > 0 {
        Err(Failure::PartialSweep(bad, res.rows.len()))
    } else {
        Ok(())
    }
}

fn figures(cfg: &RunConfig, id: &str) -> CliResult<()> {
    let id: FigureId = id.parse().map_err(|e: Error| Failure::Config(e.to_string()))?;
    let dir = cfg.run.out.join(id.name());
    let manifest = run_figure(id, &dir, cfg.init.seed, execution(cfg))?;
    println!("{} files written to {}", manifest.files.len(), dir.display());
    Ok(())
}
