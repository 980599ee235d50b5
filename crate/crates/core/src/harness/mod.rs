//! Deterministic experiment driver.
//!
//! A [`PointConfig`] fully describes one run: model, gate, initial
//! condition, integration settings and the [`Pipeline`] to apply.
//! [`SweepSpec`] expands a base point over parameter axes and replicate
//! seeds; [`run_experiment`] evaluates every point (in parallel when the
//! `parallel` feature is on) and returns rows sorted by grid index, so the
//! output does not depend on scheduling.

mod figures;
mod fit;
mod init;
mod io;
mod robustness;
mod seed;
mod sweep;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    classify_locking, convergence_time, poincare_section, LockingKind, PoincareRecord, DEFAULT_CONVERGENCE_TOL,
    DEFAULT_DRIFT_TOL, DEFAULT_LOCK_TOL,
};
use crate::error::{Error, Result};
use crate::gate::GateParams;
use crate::integrator::{integrate, IntegrationConfig, Trajectory};
use crate::locked::{continue_in_width, solve_locked, stability, LockedProfile, SolverOptions, StabilityVerdict};
use crate::model::{FrequencySpec, ModelConfig};

pub use figures::{run_figure, FigureId, Manifest, ManifestEntry, POINCARE_T_END};
pub use fit::{fit_inverse_k, InverseKFit};
pub use init::InitSpec;
pub use io::{atomic_write, rows_to_csv, write_rows_csv, SWEEP_CSV_HEADER};
pub use robustness::{robustness_sweep_k_n, GapCurve, RobustnessResult, ROBUSTNESS_K, ROBUSTNESS_N};
pub use seed::derive_seed;
pub use sweep::{run_experiment, run_experiment_resumable, Axis, Execution, SweepParam, SweepResult, SweepRow, SweepSpec};

/// Length of the final stretch of a run used for Poincaré statistics when no
/// explicit transient cut is given. About twelve mean periods for the
/// circadian frequencies used throughout.
pub const RETAINED_WINDOW: f64 = 300.0;

/// Oscillator population before frequencies are materialized, so `N` can be
/// swept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub coupling: f64,
    pub omega: FrequencySpec,
}

impl ModelSpec {
    pub fn build(&self, gate: GateParams) -> Result<ModelConfig> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("N must be at least 1".into()));
        }
        ModelConfig::from_spec(self.n, self.coupling, &self.omega, gate)
    }
}

/// Analysis applied to one configured run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Pipeline {
    /// Integrate and report the time to `|1 − R| < tol` and the final `R`.
    Simulate {
        #[serde(default = "default_convergence_tol")]
        tol: f64,
    },
    /// Integrate and report only the time to convergence.
    Convergence {
        #[serde(default = "default_convergence_tol")]
        tol: f64,
    },
    /// Section at mean phase `target` and classify locking.
    Poincare {
        #[serde(default = "default_target")]
        target: f64,
        /// Defaults to `t_end − RETAINED_WINDOW`.
        #[serde(default)]
        transient_cut: Option<f64>,
        #[serde(default = "default_lock_tol")]
        lock_tol: f64,
        #[serde(default = "default_drift_tol")]
        drift_tol: f64,
    },
    /// Continue the locked branch in dead-zone width and test its stability.
    LockedContinuation,
}

fn default_convergence_tol() -> f64 {
    DEFAULT_CONVERGENCE_TOL
}
fn default_target() -> f64 {
    PI
}
fn default_lock_tol() -> f64 {
    DEFAULT_LOCK_TOL
}
fn default_drift_tol() -> f64 {
    DEFAULT_DRIFT_TOL
}

impl Pipeline {
    pub fn poincare() -> Self {
        Pipeline::Poincare {
            target: PI,
            transient_cut: None,
            lock_tol: DEFAULT_LOCK_TOL,
            drift_tol: DEFAULT_DRIFT_TOL,
        }
    }

    pub fn convergence() -> Self {
        Pipeline::Convergence { tol: DEFAULT_CONVERGENCE_TOL }
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    pub model: ModelSpec,
    pub gate: GateParams,
    pub init: InitSpec,
    pub integration: IntegrationConfig,
    pub pipeline: Pipeline,
}

impl PointConfig {
    pub fn model_config(&self) -> Result<ModelConfig> {
        self.model.build(self.gate)
    }

    pub fn initial_phases(&self) -> Vec<f64> {
        self.init.phases(self.model.n)
    }

    pub fn validate(&self) -> Result<()> {
        self.model_config()?;
        self.integration.validate()
    }

    pub fn simulate(&self) -> Result<Trajectory> {
        integrate(&self.model_config()?, &self.integration, &self.initial_phases())
    }

    /// Crossing record for a `Poincare` pipeline (other pipelines use the
    /// default section settings).
    pub fn poincare_record(&self) -> Result<PoincareRecord> {
        let (target, cut) = match self.pipeline {
            Pipeline::Poincare { target, transient_cut, .. } => (target, transient_cut),
            _ => (PI, None),
        };
        let cut = cut.unwrap_or(self.integration.t_end - RETAINED_WINDOW);
        poincare_section(&self.model_config()?, &self.integration, &self.initial_phases(), target, cut)
    }
}

/// Observables from one run. Fields a pipeline does not produce stay `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointOutcome {
    pub verdict: Option<String>,
    pub spread: Option<f64>,
    pub omega_locked: Option<f64>,
    pub t_conv: Option<f64>,
    pub final_r: Option<f64>,
    /// Steady `θ_1 − ψ` at the section (circular mean over retained crossings).
    pub steady_gap: Option<f64>,
    pub error: Option<String>,
}

fn kind_label(kind: LockingKind) -> &'static str {
    match kind {
        LockingKind::Locked => "locked",
        LockingKind::Drifting => "drifting",
        LockingKind::Indeterminate => "indeterminate",
    }
}

fn stability_label(v: StabilityVerdict) -> &'static str {
    match v {
        StabilityVerdict::Stable => "stable",
        StabilityVerdict::Unstable => "unstable",
        StabilityVerdict::Marginal => "marginal",
    }
}

/// Runs the configured pipeline. Failures are folded into
/// [`PointOutcome::error`] rather than returned, so one bad point never
/// aborts a sweep.
pub fn run_point(pc: &PointConfig) -> PointOutcome {
    match run_point_inner(pc) {
        Ok(o) => o,
        Err(e) => PointOutcome { error: Some(e.to_string()), ..PointOutcome::default() },
    }
}

fn run_point_inner(pc: &PointConfig) -> Result<PointOutcome> {
    pc.validate()?;
    match pc.pipeline {
        Pipeline::Simulate { tol } => {
            let traj = pc.simulate()?;
            Ok(PointOutcome {
                t_conv: convergence_time(&traj, tol),
                final_r: Some(traj.final_r()),
                ..PointOutcome::default()
            })
        }
        Pipeline::Convergence { tol } => {
            let traj = pc.simulate()?;
            Ok(PointOutcome { t_conv: convergence_time(&traj, tol), ..PointOutcome::default() })
        }
        Pipeline::Poincare { lock_tol, drift_tol, .. } => {
            let rec = pc.poincare_record()?;
            let v = classify_locking(&rec, lock_tol, drift_tol);
            let times: Vec<f64> = rec.retained().map(|c| c.t).collect();
            let omega_locked = match (v.kind, times.first(), times.last()) {
                (LockingKind::Locked, Some(a), Some(b)) if times.len() > 1 => {
                    Some(std::f64::consts::TAU * (times.len() - 1) as f64 / (b - a))
                }
                _ => None,
            };
            Ok(PointOutcome {
                verdict: Some(kind_label(v.kind).to_string()),
                spread: Some(v.spread),
                omega_locked,
                steady_gap: rec.steady_gap(0),
                ..PointOutcome::default()
            })
        }
        Pipeline::LockedContinuation => {
            let cfg = pc.model_config()?;
            let opts = SolverOptions::default();
            let profile: LockedProfile = if cfg.gate.enabled {
                let mut pts = continue_in_width(&cfg, &[cfg.gate.w], &opts)?;
                pts.pop().expect("one width requested").profile?
            } else {
                let mean = cfg.mean_frequency();
                solve_locked(&cfg, (&vec![0.0; cfg.n()], mean), &opts)?
            };
            if !profile.converged {
                return Ok(PointOutcome {
                    spread: Some(profile.residual),
                    error: Some(format!("locked solve did not converge (residual {:e})", profile.residual)),
                    ..PointOutcome::default()
                });
            }
            let report = stability(&cfg, &profile)?;
            Ok(PointOutcome {
                verdict: Some(stability_label(report.verdict).to_string()),
                spread: Some(profile.residual),
                omega_locked: Some(profile.omega),
                ..PointOutcome::default()
            })
        }
    }
}
