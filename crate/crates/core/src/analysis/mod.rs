//! Trajectory observables: the Kuramoto potential, convergence time,
//! phase-separation width, and Poincaré-section locking classification.

mod poincare;
mod potential;

pub use poincare::{
    circular_mean, circular_std, classify_locking, poincare_section, LockingKind, LockingVerdict, PoincareCrossing,
    PoincareRecord, DEFAULT_DRIFT_TOL, DEFAULT_LOCK_TOL, DEFAULT_TRANSIENT_CUT, MIN_RETAINED_CROSSINGS,
};
pub use potential::{kuramoto_potential, potential_descent_rate, potential_gradient};

use crate::integrator::Trajectory;
use crate::phase::circular_distance;

/// Default tolerance on `|1 − R|` for [`convergence_time`].
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-4;

/// First sampled time with `|1 − R(t)| < tol`.
pub fn convergence_time(traj: &Trajectory, tol: f64) -> Option<f64> {
    traj.times
        .iter()
        .zip(&traj.r_series)
        .find(|(_, r)| (1.0 - **r).abs() < tol)
        .map(|(t, _)| *t)
}

/// Largest pairwise circular distance within a profile, in `[0, π]`.
pub fn delta_max(profile: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for (i, &a) in profile.iter().enumerate() {
        for &b in &profile[i + 1..] {
            best = best.max(circular_distance(a, b));
        }
    }
    best
}
