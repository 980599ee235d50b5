//! Run configuration file: JSON with `model`, `gate`, `init`,
//! `integration` and `run` sections. Every key is optional; unknown keys
//! are rejected.

use std::f64::consts::PI;
use std::path::PathBuf;

use gated_kuramoto::harness::{Axis, InitSpec, ModelSpec, Pipeline, PointConfig, SweepSpec};
use gated_kuramoto::integrator::IntegrationConfig;
use gated_kuramoto::{FrequencySpec, GateFrame, GateParams, Phase};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelSection,
    pub gate: GateSection,
    pub init: InitSection,
    pub integration: IntegrationSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub coupling: f64,
    pub omega: FrequencySpec,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection { n: 20, coupling: 0.02, omega: FrequencySpec::Identical(24.0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateSection {
    pub enabled: bool,
    pub theta0: f64,
    pub w: f64,
    pub k: f64,
    /// Unset means `fixed` for identical frequencies and `mean_phase`
    /// otherwise.
    pub frame: Option<GateFrame>,
}

impl Default for GateSection {
    fn default() -> Self {
        GateSection { enabled: true, theta0: 0.0, w: PI, k: 10.0, frame: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    #[default]
    UniformRandom,
    Equispaced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct InitSection {
    pub mode: InitMode,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationSection {
    pub t_end: f64,
    pub rtol: f64,
    pub atol: f64,
    pub sample_dt: f64,
    pub max_step: Option<f64>,
}

impl Default for IntegrationSection {
    fn default() -> Self {
        IntegrationSection { t_end: 1000.0, rtol: 1e-8, atol: 1e-10, sample_dt: 0.5, max_step: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RunKind {
    #[default]
    Simulate,
    Poincare,
    Locked,
    SweepConvergence,
    SweepPoincare,
    Robustness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub kind: RunKind,
    /// Output directory (`--out`).
    pub out: PathBuf,
    /// Worker count (`--jobs`); unset uses every core.
    pub jobs: Option<usize>,
    /// Convergence threshold on `|1 − R|`.
    pub tol: f64,
    /// Poincaré section phase.
    pub target: f64,
    /// Unset keeps the final 300 time units.
    pub transient_cut: Option<f64>,
    pub lock_tol: f64,
    pub drift_tol: f64,
    /// Sweep axes over `K`, `w`, `k`, `N`.
    pub axes: Vec<Axis>,
    pub replicate_seeds: Vec<u64>,
    /// JSON-lines checkpoint for resumable sweeps.
    pub checkpoint: Option<PathBuf>,
    /// Robustness widths; `k_values` and `N_values` default to the standard study.
    pub widths: Vec<f64>,
    pub k_values: Option<Vec<f64>>,
    #[serde(rename = "N_values")]
    pub n_values: Option<Vec<usize>>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            kind: RunKind::Simulate,
            out: PathBuf::from("out"),
            jobs: None,
            tol: gated_kuramoto::analysis::DEFAULT_CONVERGENCE_TOL,
            target: PI,
            transient_cut: None,
            lock_tol: gated_kuramoto::analysis::DEFAULT_LOCK_TOL,
            drift_tol: gated_kuramoto::analysis::DEFAULT_DRIFT_TOL,
            axes: Vec::new(),
            replicate_seeds: Vec::new(),
            checkpoint: None,
            widths: (0..32).map(|i| 0.1 * i as f64).collect(),
            k_values: None,
            n_values: None,
        }
    }
}

/// Sets `path` (dot separated) in `doc` to `raw`, parsed as JSON when
/// possible and as a string otherwise. Intermediate objects are created.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), String> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| format!("override {assignment:?} is not of the form key=value"))?;
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(format!("bad override key {path:?}"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let mut parts = path.split('.').peekable();
    while let Some(key) = parts.next() {
        let obj = match node {
            Value::Object(map) => map,
            other => {
                *other = Value::Object(Default::default());
                other.as_object_mut().expect("just made an object")
            }
        };
        if parts.peek().is_none() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        node = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

/// Parses a config document after applying `--set` overrides in order.
pub fn resolve(file_text: Option<&str>, overrides: &[String]) -> Result<RunConfig, String> {
    let mut doc: Value = match file_text {
        Some(text) => serde_json::from_str(text).map_err(|e| format!("config is not valid JSON: {e}"))?,
        None => Value::Object(Default::default()),
    };
    if !doc.is_object() {
        return Err("config must be a JSON object".into());
    }
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    let mut cfg: RunConfig = serde_json::from_value(doc).map_err(|e| format!("invalid config: {e}"))?;
    if cfg.gate.frame.is_none() {
        cfg.gate.frame = Some(match cfg.model.omega {
            FrequencySpec::Identical(_) => GateFrame::Fixed,
            _ => GateFrame::MeanPhase,
        });
    }
    Ok(cfg)
}

impl RunConfig {
    pub fn gate_params(&self) -> GateParams {
        GateParams {
            theta0: Phase::new(self.gate.theta0),
            w: self.gate.w,
            k: self.gate.k,
            enabled: self.gate.enabled,
            frame: self.gate.frame.unwrap_or_default(),
        }
    }

    pub fn init_spec(&self) -> InitSpec {
        match self.init.mode {
            InitMode::UniformRandom => InitSpec::UniformRandom { seed: self.init.seed },
            InitMode::Equispaced => InitSpec::Equispaced,
        }
    }

    pub fn integration_config(&self) -> IntegrationConfig {
        let i = &self.integration;
        let mut c = IntegrationConfig::new(0.0, i.t_end).with_tolerances(i.rtol, i.atol).with_sample_dt(i.sample_dt);
        c.max_step = i.max_step;
        c
    }

    pub fn pipeline(&self) -> Pipeline {
        let r = &self.run;
        match r.kind {
            RunKind::Simulate => Pipeline::Simulate { tol: r.tol },
            RunKind::SweepConvergence => Pipeline::Convergence { tol: r.tol },
            RunKind::Locked => Pipeline::LockedContinuation,
            RunKind::Poincare | RunKind::SweepPoincare | RunKind::Robustness => Pipeline::Poincare {
                target: r.target,
                transient_cut: r.transient_cut,
                lock_tol: r.lock_tol,
                drift_tol: r.drift_tol,
            },
        }
    }

    pub fn point(&self) -> PointConfig {
        PointConfig {
            model: ModelSpec { n: self.model.n, coupling: self.model.coupling, omega: self.model.omega.clone() },
            gate: self.gate_params(),
            init: self.init_spec(),
            integration: self.integration_config(),
            pipeline: self.pipeline(),
        }
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        SweepSpec { base: self.point(), axes: self.run.axes.clone(), replicate_seeds: self.run.replicate_seeds.clone() }
    }
}
