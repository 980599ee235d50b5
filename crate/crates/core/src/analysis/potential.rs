use crate::error::{Error, Result};
use crate::gate::GateFrame;
use crate::model::ModelConfig;

/// `U = −(1/2N) Σ_i Σ_j cos(θ_i − θ_j)`, evaluated pairwise.
pub fn kuramoto_potential(phases: &[f64]) -> f64 {
    let n = phases.len() as f64;
    let mut total = 0.0;
    for &a in phases {
        for &b in phases {
            total += (a - b).cos();
        }
    }
    -total / (2.0 * n)
}

/// `∂U/∂θ_i = (1/N) Σ_j sin(θ_i − θ_j)`.
pub fn potential_gradient(phases: &[f64]) -> Vec<f64> {
    let n = phases.len() as f64;
    phases
        .iter()
        .map(|&a| phases.iter().map(|&b| (a - b).sin()).sum::<f64>() / n)
        .collect()
}

/// `dU/dt = −K Σ_i S(θ_i)·(∂U/∂θ_i)²` for identical frequencies with the
/// gate in the laboratory frame.
pub fn potential_descent_rate(cfg: &ModelConfig, phases: &[f64]) -> Result<f64> {
    if !cfg.identical_frequencies() {
        return Err(Error::PreconditionViolated(
            "potential descent requires identical intrinsic frequencies".into(),
        ));
    }
    if cfg.gate.enabled && cfg.gate.frame != GateFrame::Fixed {
        return Err(Error::PreconditionViolated(
            "potential descent requires the gate in the fixed frame".into(),
        ));
    }
    let grad = potential_gradient(phases);
    let weighted: f64 = phases
        .iter()
        .zip(&grad)
        .map(|(&th, g)| cfg.gate.value(th) * g * g)
        .sum();
    Ok(-cfg.coupling * weighted)
}
