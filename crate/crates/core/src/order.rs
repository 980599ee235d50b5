//! Kuramoto order parameter `R·e^{iψ} = (1/N) Σ e^{iθ_j}`.

use serde::{Deserialize, Serialize};

use crate::phase::Phase;

/// Below this coherence the mean phase is reported as zero and flagged.
pub const DEGENERATE_R: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderParameter {
    /// Coherence in `[0, 1]`.
    pub r: f64,
    /// Mean phase.
    pub psi: Phase,
    /// True when `r` is too small for `psi` to be meaningful.
    pub degenerate: bool,
}

/// Sums `(Σ cos θ_j, Σ sin θ_j)`.
#[inline]
pub(crate) fn phase_sums(phases: &[f64]) -> (f64, f64) {
    phases.iter().fold((0.0, 0.0), |(c, s), &th| {
        let (sn, cs) = th.sin_cos();
        (c + cs, s + sn)
    })
}

pub fn order_parameter(phases: &[f64]) -> OrderParameter {
    let n = phases.len().max(1) as f64;
    let (c, s) = phase_sums(phases);
    let (x, y) = (c / n, s / n);
    let r = x.hypot(y).min(1.0);
    if r < DEGENERATE_R {
        OrderParameter { r, psi: Phase::ZERO, degenerate: true }
    } else {
        OrderParameter { r, psi: Phase::new(y.atan2(x)), degenerate: false }
    }
}
