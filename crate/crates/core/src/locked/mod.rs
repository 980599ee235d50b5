//! Phase-locked states in the co-rotating frame.
//!
//! A locked state is a profile `ϑ` and common frequency `Ω` with
//! `ω_i − Ω + (K/N)·S(ϑ_i)·Σ_j sin(ϑ_j − ϑ_i) = 0` for every `i`. The gate is
//! evaluated at `ϑ_i` directly: the dead zone is attached to the rotating
//! reference, whatever frame the model's gate is configured with.

mod continuation;
mod jacobian;
mod newton;
mod perturbation;
mod stability;

use serde::{Deserialize, Serialize};

use crate::model::{coupling_sums, ModelConfig};

pub use continuation::{continue_in_width, ContinuationPoint, WIDTH_STEP};
pub use jacobian::{jacobian, jacobian_diagonal_from_balance};
pub use newton::{classical_locked_state, solve_locked, Normalization, SolverOptions, CONVERGED_RESIDUAL};
pub use perturbation::{branch_model, perturbative_branch, HeterogeneitySpec, PerturbativePrediction, MIN_GATE_AT_REFERENCE};
pub use stability::{stability, StabilityReport, StabilityVerdict, NEUTRAL_ALIGNMENT, NEUTRAL_EIGENVALUE, VERDICT_MARGIN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LockedProfile {
    /// Relative phases in the co-rotating frame.
    pub vartheta: Vec<f64>,
    /// Locked frequency.
    pub omega: f64,
    /// ∞-norm of the balance residuals.
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
    pub normalization: Normalization,
}

/// `r_i = ω_i − Ω + (K/N)·S(ϑ_i)·Σ_j sin(ϑ_j − ϑ_i)`.
pub fn locked_residual(cfg: &ModelConfig, vartheta: &[f64], omega: f64) -> Vec<f64> {
    let scale = cfg.coupling / cfg.n() as f64;
    coupling_sums(vartheta)
        .into_iter()
        .zip(vartheta)
        .zip(&cfg.omega)
        .map(|((sum, &th), &w)| w - omega + scale * cfg.gate.value(th) * sum)
        .collect()
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Locked frequency implied by a profile through the pairwise identity
/// `Ω = mean(ω) + (K/N²) Σ_{i<j} (S(ϑ_i) − S(ϑ_j))·sin(ϑ_j − ϑ_i)`.
///
/// Returns `(Ω, correction)` where `correction` is the gate-induced term.
pub fn locked_frequency_identity(cfg: &ModelConfig, vartheta: &[f64]) -> (f64, f64) {
    let n = vartheta.len();
    let gate: Vec<f64> = vartheta.iter().map(|&th| cfg.gate.value(th)).collect();
    let mut pairwise = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            pairwise += (gate[i] - gate[j]) * (vartheta[j] - vartheta[i]).sin();
        }
    }
    let correction = cfg.coupling / (n * n) as f64 * pairwise;
    (cfg.mean_frequency() + correction, correction)
}

/// A locked profile together with its stability, in the exported JSON shape
/// `{vartheta, omega, residual, converged, iterations, eigenvalues, verdict}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LockedReport {
    pub vartheta: Vec<f64>,
    pub omega: f64,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
    pub eigenvalues: Vec<[f64; 2]>,
    pub verdict: Option<StabilityVerdict>,
}

impl LockedReport {
    pub fn new(profile: &LockedProfile, stab: Option<&StabilityReport>) -> Self {
        LockedReport {
            vartheta: profile.vartheta.clone(),
            omega: profile.omega,
            residual: profile.residual,
            converged: profile.converged,
            iterations: profile.iterations,
            eigenvalues: stab.map_or_else(Vec::new, |s| s.eigenvalues.iter().map(|z| [z.re, z.im]).collect()),
            verdict: stab.map(|s| s.verdict),
        }
    }
}
