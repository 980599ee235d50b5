use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::GateParams;
use crate::model::ModelConfig;
use crate::phase::Phase;

/// Smallest gate value at the reference phase for which the branch formula
/// is evaluated.
pub const MIN_GATE_AT_REFERENCE: f64 = 1e-6;

/// Frequencies `ω_i = ω̄ + ε·ν_i` with `Σ ν_i = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneitySpec {
    pub omega_bar: f64,
    pub nu: Vec<f64>,
    pub epsilon: f64,
}

impl HeterogeneitySpec {
    pub fn new(omega_bar: f64, nu: Vec<f64>, epsilon: f64) -> Result<Self> {
        let spec = HeterogeneitySpec { omega_bar, nu, epsilon };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nu.is_empty() {
            return Err(Error::InvalidConfig("nu must be non-empty".into()));
        }
        if !self.omega_bar.is_finite() || !self.epsilon.is_finite() || self.nu.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("heterogeneity must be finite".into()));
        }
        let sum: f64 = self.nu.iter().sum();
        if sum.abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!("nu must sum to zero, got {sum:e}")));
        }
        Ok(())
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.nu.iter().map(|v| self.omega_bar + self.epsilon * v).collect()
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        HeterogeneitySpec { epsilon, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbativePrediction {
    /// Leading-order offsets `ρ_i = ε ν_i / (K S(θ*))` from the reference phase.
    pub rho: Vec<f64>,
    /// Leading-order locked frequency, `ω̄`.
    pub omega: f64,
    /// Predicted pairwise gaps `gaps[i][j] = ρ_i − ρ_j`.
    pub gaps: Vec<Vec<f64>>,
}

/// Leading-order locked branch bifurcating from synchrony at `θ*`.
pub fn perturbative_branch(spec: &HeterogeneitySpec, theta_star: Phase, cfg: &ModelConfig) -> Result<PerturbativePrediction> {
    spec.validate()?;
    if !(cfg.coupling > 0.0) {
        return Err(Error::PreconditionViolated("perturbative branch requires K > 0".into()));
    }
    let s = cfg.gate.value(theta_star.value());
    if !(s > MIN_GATE_AT_REFERENCE) {
        return Err(Error::PreconditionViolated(format!("S(θ*) = {s:e} is inside the dead zone")));
    }
    let scale = spec.epsilon / (cfg.coupling * s);
    let rho: Vec<f64> = spec.nu.iter().map(|v| scale * v).collect();
    let gaps = rho.iter().map(|a| rho.iter().map(|b| a - b).collect()).collect();
    Ok(PerturbativePrediction { rho, omega: spec.omega_bar, gaps })
}

/// Model whose locked profile, under zero-sum normalization, is the offset
/// `ρ = ϑ − θ*` of the branch: frequencies from `spec`, gate recentred so
/// that `S_new(ρ) = S(θ* + ρ)`.
pub fn branch_model(spec: &HeterogeneitySpec, theta_star: Phase, cfg: &ModelConfig) -> Result<ModelConfig> {
    spec.validate()?;
    let gate = GateParams {
        theta0: Phase::new(cfg.gate.theta0.value() - theta_star.value()),
        ..cfg.gate
    };
    ModelConfig::new(cfg.coupling, spec.frequencies(), gate)
}
