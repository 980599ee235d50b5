//! Model configuration and the gated right-hand side
//! `dθ_i/dt = ω_i + (K/N)·S(arg_i)·Σ_j sin(θ_j − θ_i)`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::{GateFrame, GateParams};
use crate::order::{phase_sums, DEGENERATE_R};

/// How intrinsic frequencies are specified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencySpec {
    /// Common period `τ`: every `ω_i = 2π/τ`.
    Identical(f64),
    /// Periods spaced linearly on `[τ_min, τ_max]`.
    PeriodRange([f64; 2]),
    /// Angular frequencies given directly.
    Explicit(Vec<f64>),
}

impl FrequencySpec {
    pub fn frequencies(&self, n: usize) -> Result<Vec<f64>> {
        let omega = match self {
            FrequencySpec::Identical(tau) => {
                if !(*tau > 0.0 && tau.is_finite()) {
                    return Err(Error::InvalidConfig(format!("period must be positive, got {tau}")));
                }
                vec![TAU / tau; n]
            }
            FrequencySpec::PeriodRange([lo, hi]) => {
                if !(*lo > 0.0 && hi >= lo && hi.is_finite()) {
                    return Err(Error::InvalidConfig(format!("bad period range [{lo}, {hi}]")));
                }
                if n < 2 {
                    return Err(Error::InvalidConfig("period range needs N ≥ 2".into()));
                }
                (0..n)
                    .map(|i| TAU / (lo + (hi - lo) * i as f64 / (n - 1) as f64))
                    .collect()
            }
            FrequencySpec::Explicit(w) => {
                if w.len() != n {
                    return Err(Error::InvalidConfig(format!(
                        "explicit frequencies have length {} but N = {n}",
                        w.len()
                    )));
                }
                w.clone()
            }
        };
        Ok(omega)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Coupling strength `K`.
    pub coupling: f64,
    /// Intrinsic angular frequencies; `N = omega.len()`.
    pub omega: Vec<f64>,
    pub gate: GateParams,
}

impl ModelConfig {
    pub fn new(coupling: f64, omega: Vec<f64>, gate: GateParams) -> Result<Self> {
        let cfg = ModelConfig { coupling, omega, gate };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_spec(n: usize, coupling: f64, freq: &FrequencySpec, gate: GateParams) -> Result<Self> {
        ModelConfig::new(coupling, freq.frequencies(n)?, gate)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.omega.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega.len() < 2 {
            return Err(Error::InvalidConfig(format!("need N ≥ 2 oscillators, got {}", self.omega.len())));
        }
        if !(self.coupling >= 0.0 && self.coupling.is_finite()) {
            return Err(Error::InvalidConfig(format!("coupling must be finite and ≥ 0, got {}", self.coupling)));
        }
        if self.omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidConfig("frequencies must be finite".into()));
        }
        self.gate.validate()
    }

    pub fn mean_frequency(&self) -> f64 {
        self.omega.iter().sum::<f64>() / self.n() as f64
    }

    pub fn identical_frequencies(&self) -> bool {
        self.omega.windows(2).all(|p| p[0] == p[1])
    }
}

/// Gated right-hand side, O(N) through the mean-field identity
/// `Σ_j sin(θ_j − θ_i) = S_y·cos θ_i − S_x·sin θ_i` where
/// `S_x = Σ_j cos θ_j` and `S_y = Σ_j sin θ_j`.
pub fn rhs(cfg: &ModelConfig, t: f64, phases: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; phases.len()];
    rhs_into(cfg, t, phases, &mut out);
    out
}

pub fn rhs_into(cfg: &ModelConfig, t: f64, phases: &[f64], out: &mut [f64]) {
    let n = phases.len();
    debug_assert_eq!(n, cfg.n());
    debug_assert_eq!(out.len(), n);
    let (sx, sy) = phase_sums(phases);
    let reference = reference_from_sums(&cfg.gate, t, sx, sy, n);
    let scale = cfg.coupling / n as f64;
    for ((o, &th), &w) in out.iter_mut().zip(phases).zip(&cfg.omega) {
        let (sn, cs) = th.sin_cos();
        let sum = sy * cs - sx * sn;
        *o = w + scale * cfg.gate.value(th - reference) * sum;
    }
}

/// Same field evaluated with the direct pairwise O(N²) sum.
pub fn rhs_pairwise(cfg: &ModelConfig, t: f64, phases: &[f64]) -> Vec<f64> {
    let n = phases.len();
    let (sx, sy) = phase_sums(phases);
    let reference = reference_from_sums(&cfg.gate, t, sx, sy, n);
    let scale = cfg.coupling / n as f64;
    phases
        .iter()
        .zip(&cfg.omega)
        .map(|(&th, &w)| {
            let sum: f64 = phases.iter().map(|&tj| (tj - th).sin()).sum();
            w + scale * cfg.gate.value(th - reference) * sum
        })
        .collect()
}

/// `Σ_j sin(θ_j − θ_i)` for every `i`, via the mean field.
pub fn coupling_sums(phases: &[f64]) -> Vec<f64> {
    let (sx, sy) = phase_sums(phases);
    phases
        .iter()
        .map(|&th| {
            let (sn, cs) = th.sin_cos();
            sy * cs - sx * sn
        })
        .collect()
}

fn reference_from_sums(g: &GateParams, t: f64, sx: f64, sy: f64, n: usize) -> f64 {
    if !g.enabled {
        return 0.0;
    }
    match g.frame {
        GateFrame::Fixed => 0.0,
        GateFrame::LinearReference { omega_ref, psi0 } => omega_ref * t + psi0.value(),
        GateFrame::MeanPhase => {
            if sx.hypot(sy) / (n as f64) < DEGENERATE_R {
                0.0
            } else {
                sy.atan2(sx)
            }
        }
    }
}
