use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::integrator::{fmt17, integrate_with_events, EventSpec, IntegrationConfig};
use crate::model::ModelConfig;
use crate::order::order_parameter;
use crate::phase::wrapped_distance;

pub const DEFAULT_TRANSIENT_CUT: f64 = 900.0;
pub const DEFAULT_LOCK_TOL: f64 = 1e-3;
pub const DEFAULT_DRIFT_TOL: f64 = 1e-2;
/// Fewer retained crossings than this give an `Indeterminate` verdict.
pub const MIN_RETAINED_CROSSINGS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareCrossing {
    pub t: f64,
    /// `d(θ_i, ψ)` for every oscillator at the crossing.
    pub rel_phases: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareRecord {
    pub crossings: Vec<PoincareCrossing>,
    /// Crossings at or before this time are excluded from statistics.
    pub transient_cut: f64,
}

impl PoincareRecord {
    pub fn retained(&self) -> impl Iterator<Item = &PoincareCrossing> + '_ {
        self.crossings.iter().filter(move |c| c.t > self.transient_cut)
    }

    pub fn retained_count(&self) -> usize {
        self.retained().count()
    }

    /// Circular mean of oscillator `i`'s retained relative phase.
    pub fn steady_gap(&self, i: usize) -> Option<f64> {
        let v: Vec<f64> = self.retained().map(|c| c.rel_phases[i]).collect();
        circular_mean(&v)
    }

    /// Circular mean of every oscillator's retained relative phase.
    pub fn mean_profile(&self) -> Option<Vec<f64>> {
        let n = self.crossings.first()?.rel_phases.len();
        (0..n).map(|i| self.steady_gap(i)).collect()
    }

    /// CSV with header `t_cross,rel_1,...,rel_N`, one row per crossing.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.crossings.first().map_or(0, |c| c.rel_phases.len());
        let mut header = String::from("t_cross");
        for i in 1..=n {
            header.push_str(&format!(",rel_{i}"));
        }
        writeln!(w, "{header}")?;
        for c in &self.crossings {
            let mut line = fmt17(c.t);
            for r in &c.rel_phases {
                line.push(',');
                line.push_str(&fmt17(*r));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Samples relative phases each time the mean phase increases through
/// `target`, after integrating the full run.
pub fn poincare_section(
    cfg: &ModelConfig,
    icfg: &IntegrationConfig,
    y0: &[f64],
    target: f64,
    transient_cut: f64,
) -> Result<PoincareRecord> {
    let (_, crossings) = integrate_with_events(cfg, icfg, y0, &EventSpec::mean_phase(target))?;
    let crossings = crossings
        .into_iter()
        .map(|c| {
            let psi = order_parameter(&c.state).psi.value();
            PoincareCrossing {
                t: c.t,
                rel_phases: c.state.iter().map(|&th| wrapped_distance(th, psi)).collect(),
            }
        })
        .collect();
    Ok(PoincareRecord { crossings, transient_cut })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LockingKind {
    Locked,
    Drifting,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LockingVerdict {
    pub kind: LockingKind,
    /// Largest per-oscillator circular standard deviation across retained crossings.
    pub spread: f64,
    pub n_crossings: usize,
}

pub fn circular_mean(angles: &[f64]) -> Option<f64> {
    if angles.is_empty() {
        return None;
    }
    let (s, c) = angles.iter().fold((0.0, 0.0), |(s, c), a| (s + a.sin(), c + a.cos()));
    Some(s.atan2(c))
}

/// `sqrt(−2 ln R̄)` with `R̄` the mean resultant length.
pub fn circular_std(angles: &[f64]) -> f64 {
    if angles.is_empty() {
        return 0.0;
    }
    let n = angles.len() as f64;
    let (s, c) = angles.iter().fold((0.0, 0.0), |(s, c), a| (s + a.sin(), c + a.cos()));
    let rbar = (s.hypot(c) / n).clamp(1e-300, 1.0);
    (-2.0 * rbar.ln()).max(0.0).sqrt()
}

pub fn classify_locking(rec: &PoincareRecord, lock_tol: f64, drift_tol: f64) -> LockingVerdict {
    let kept: Vec<&PoincareCrossing> = rec.retained().collect();
    let n_crossings = kept.len();
    let n = kept.first().map_or(0, |c| c.rel_phases.len());
    let spread = (0..n)
        .map(|i| {
            let v: Vec<f64> = kept.iter().map(|c| c.rel_phases[i]).collect();
            circular_std(&v)
        })
        .fold(0.0f64, f64::max);
    let kind = if n_crossings < MIN_RETAINED_CROSSINGS {
        LockingKind::Indeterminate
    } else if spread < lock_tol {
        LockingKind::Locked
    } else if spread >= drift_tol {
        LockingKind::Drifting
    } else {
        LockingKind::Indeterminate
    };
    LockingVerdict { kind, spread, n_crossings }
}

impl LockingVerdict {
    /// `{kind, spread, n_crossings, ...params}`.
    pub fn to_json(&self, params: &serde_json::Value) -> serde_json::Value {
        let mut obj = serde_json::json!({
            "kind": self.kind,
            "spread": self.spread,
            "n_crossings": self.n_crossings,
        });
        if let (Some(map), Some(extra)) = (obj.as_object_mut(), params.as_object()) {
            for (k, v) in extra {
                map.insert(k.clone(), v.clone());
            }
        }
        obj
    }
}
