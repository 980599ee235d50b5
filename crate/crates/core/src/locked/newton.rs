use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{inf_norm, jacobian, locked_residual, LockedProfile};
use crate::error::{Error, Result};
use crate::model::ModelConfig;

/// Balance residual below which a profile counts as converged.
pub const CONVERGED_RESIDUAL: f64 = 1e-10;

/// How the free phase origin of the co-rotating frame is pinned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `Σ ϑ_i = 0`.
    #[default]
    ZeroSum,
    /// `arg Σ e^{iϑ_j} = 0`, the origin at the population mean phase.
    ZeroMeanPhase,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub normalization: Normalization,
    /// Iteration stops early once the residual reaches this level.
    pub target_residual: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_iterations: 100, normalization: Normalization::ZeroSum, target_residual: 1e-14 }
    }
}

struct System<'a> {
    cfg: &'a ModelConfig,
    norm: Normalization,
}

impl System<'_> {
    fn n(&self) -> usize {
        self.cfg.n()
    }

    fn constraint(&self, vt: &[f64]) -> f64 {
        match self.norm {
            Normalization::ZeroSum => vt.iter().sum(),
            Normalization::ZeroMeanPhase => vt.iter().map(|v| v.sin()).sum(),
        }
    }

    fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n();
        let vt = &x.as_slice()[..n];
        let mut r = locked_residual(self.cfg, vt, x[n]);
        r.push(self.constraint(vt));
        DVector::from_vec(r)
    }

    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n();
        let vt = &x.as_slice()[..n];
        let j = jacobian(self.cfg, vt);
        let mut a = DMatrix::zeros(n + 1, n + 1);
        a.view_mut((0, 0), (n, n)).copy_from(&j);
        for i in 0..n {
            a[(i, n)] = -1.0;
            a[(n, i)] = match self.norm {
                Normalization::ZeroSum => 1.0,
                Normalization::ZeroMeanPhase => vt[i].cos(),
            };
        }
        a
    }

    fn balance_norm(&self, x: &DVector<f64>) -> f64 {
        let n = self.n();
        inf_norm(&locked_residual(self.cfg, &x.as_slice()[..n], x[n]))
    }
}

fn newton_step(a: DMatrix<f64>, rhs: &DVector<f64>, iterations: usize) -> Result<DVector<f64>> {
    if let Some(d) = a.clone().lu().solve(rhs) {
        if d.iter().all(|v| v.is_finite()) {
            return Ok(d);
        }
    }
    // rank-deficient LU: fall back to a truncated pseudo-inverse
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-13 * smax) {
        return Err(Error::SingularJacobian { iterations });
    }
    svd.solve(rhs, 1e-13 * smax).map_err(|_| Error::SingularJacobian { iterations })
}

/// Damped Newton iteration for `(ϑ, Ω)` on the balance equations plus the
/// normalization constraint, with backtracking on the residual norm.
///
/// Failure to reach [`CONVERGED_RESIDUAL`] is not an error: the best iterate
/// comes back with `converged = false`.
pub fn solve_locked(cfg: &ModelConfig, guess: (&[f64], f64), opts: &SolverOptions) -> Result<LockedProfile> {
    let n = cfg.n();
    let (vt0, om0) = guess;
    if vt0.len() != n {
        return Err(Error::InvalidConfig(format!("guess has length {} but N = {n}", vt0.len())));
    }
    if !om0.is_finite() || vt0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("guess must be finite".into()));
    }
    let sys = System { cfg, norm: opts.normalization };
    let mut x = DVector::from_iterator(n + 1, vt0.iter().copied().chain(std::iter::once(om0)));
    if opts.normalization == Normalization::ZeroSum {
        let mean = vt0.iter().sum::<f64>() / n as f64;
        for i in 0..n {
            x[i] -= mean;
        }
    }
    let mut f = sys.residual(&x);
    let mut fnorm = f.norm();
    let mut iterations = 0;

    while iterations < opts.max_iterations && f.amax() > opts.target_residual {
        iterations += 1;
        let d = newton_step(sys.jacobian(&x), &(-&f), iterations)?;
        let mut accepted = false;
        let mut lambda = 1.0;
        for _ in 0..=20 {
            let trial = &x + lambda * &d;
            let ft = sys.residual(&trial);
            let tn = ft.norm();
            if tn.is_finite() && tn < (1.0 - 1e-4 * lambda) * fnorm {
                x = trial;
                f = ft;
                fnorm = tn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    if opts.normalization == Normalization::ZeroSum {
        let mean = x.as_slice()[..n].iter().sum::<f64>() / n as f64;
        for i in 0..n {
            x[i] -= mean;
        }
    }
    let residual = sys.balance_norm(&x);
    let constraint_ok = sys.constraint(&x.as_slice()[..n]).abs() <= 1e-10;
    Ok(LockedProfile {
        vartheta: x.as_slice()[..n].to_vec(),
        omega: x[n],
        residual,
        converged: residual <= CONVERGED_RESIDUAL && constraint_ok,
        iterations,
        normalization: opts.normalization,
    })
}

/// Stable classical (ungated) locked state from the self-consistency
/// condition `sin ϑ_i = (ω_i − Ω)/(K r)`, `r = (1/N) Σ cos ϑ_i`, with
/// `Ω = mean(ω)`. Returns the branch with the largest `r`, normalized to zero
/// mean phase, or `None` when no locked state exists.
pub fn classical_locked_state(omega: &[f64], coupling: f64) -> Option<(Vec<f64>, f64)> {
    if coupling <= 0.0 || omega.is_empty() {
        return None;
    }
    let n = omega.len() as f64;
    let big = omega.iter().sum::<f64>() / n;
    let dev: Vec<f64> = omega.iter().map(|w| w - big).collect();
    let max_dev = inf_norm(&dev);
    if max_dev == 0.0 {
        return Some((vec![0.0; omega.len()], big));
    }
    let r_min = max_dev / coupling;
    if r_min > 1.0 {
        return None;
    }
    let excess = |r: f64| -> f64 {
        dev.iter()
            .map(|d| (1.0 - (d / (coupling * r)).powi(2)).max(0.0).sqrt())
            .sum::<f64>()
            / n
            - r
    };
    // largest root of excess(r) = 0 on [r_min, 1]; excess(1) ≤ 0
    let grid = 4000;
    let mut hi = 1.0;
    let mut lo = None;
    for s in (0..grid).rev() {
        let r = r_min + (1.0 - r_min) * s as f64 / grid as f64;
        if excess(r) > 0.0 {
            lo = Some(r);
            break;
        }
        hi = r;
    }
    let mut lo = lo?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    let vt = dev.iter().map(|d| (d / (coupling * r)).clamp(-1.0, 1.0).asin()).collect();
    Some((vt, big))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::GateParams;
    use crate::locked::locked_frequency_identity;
    use crate::model::FrequencySpec;
    use std::f64::consts::PI;

    fn fig4_cfg(coupling: f64, gate: GateParams) -> ModelConfig {
        ModelConfig::from_spec(20, coupling, &FrequencySpec::PeriodRange([23.0, 25.0]), gate).unwrap()
    }

    #[test]
    fn identical_frequencies_converge_to_synchrony() {
        let cfg = ModelConfig::new(0.2, vec![0.26; 8], GateParams::new(0.0, PI, 10.0)).unwrap();
        let guess: Vec<f64> = (0..8).map(|i| 0.01 * (i as f64 - 3.5)).collect();
        let p = solve_locked(&cfg, (&guess, 0.25), &SolverOptions::default()).unwrap();
        assert!(p.converged);
        assert!(p.vartheta.iter().all(|v| v.abs() < 1e-12));
        assert!((p.omega - 0.26).abs() < 1e-14);
    }

    #[test]
    fn classical_oracle_has_tiny_residual() {
        let cfg = fig4_cfg(0.02, GateParams::disabled());
        let (vt, om) = classical_locked_state(&cfg.omega, 0.02).expect("locked");
        assert!(inf_norm(&locked_residual(&cfg, &vt, om)) <= 1e-10);
        assert!(classical_locked_state(&cfg.omega, 0.005).is_none());
    }

    #[test]
    fn classical_heterogeneous_omega_is_mean() {
        let cfg = fig4_cfg(0.02, GateParams::disabled());
        let (vt, om) = classical_locked_state(&cfg.omega, 0.02).unwrap();
        let p = solve_locked(&cfg, (&vt, om), &SolverOptions::default()).unwrap();
        assert!(p.converged, "residual {}", p.residual);
        assert!((p.omega - cfg.mean_frequency()).abs() < 1e-10);
        assert!(p.vartheta.iter().sum::<f64>().abs() < 1e-12);
        let (om_id, _) = locked_frequency_identity(&cfg, &p.vartheta);
        assert!((om_id - p.omega).abs() < 1e-9);
    }

    #[test]
    fn zero_guess_with_strong_coupling() {
        let cfg = fig4_cfg(0.2, GateParams::new(0.0, 1.0, 10.0));
        let p = solve_locked(&cfg, (&[0.0; 20], cfg.mean_frequency()), &SolverOptions::default()).unwrap();
        assert!(p.converged);
        let (om_id, corr) = locked_frequency_identity(&cfg, &p.vartheta);
        assert!((om_id - p.omega).abs() < 1e-9);
        assert!(corr != 0.0);
    }

    #[test]
    fn mean_phase_normalization() {
        let cfg = fig4_cfg(0.05, GateParams::new(PI, 1.0, 10.0));
        let opts = SolverOptions { normalization: Normalization::ZeroMeanPhase, ..Default::default() };
        let p = solve_locked(&cfg, (&[0.0; 20], cfg.mean_frequency()), &opts).unwrap();
        assert!(p.converged);
        let s: f64 = p.vartheta.iter().map(|v| v.sin()).sum();
        assert!(s.abs() < 1e-10);
    }

    #[test]
    fn hopeless_case_reports_not_converged() {
        // coupling far below what the frequency spread needs
        let cfg = fig4_cfg(0.001, GateParams::disabled());
        let p = solve_locked(&cfg, (&[0.0; 20], cfg.mean_frequency()), &SolverOptions::default());
        match p {
            Ok(p) => assert!(!p.converged),
            Err(e) => assert!(matches!(e, Error::SingularJacobian { .. })),
        }
    }

    #[test]
    fn bad_guess_rejected() {
        let cfg = fig4_cfg(0.02, GateParams::disabled());
        assert!(solve_locked(&cfg, (&[0.0; 3], 0.0), &SolverOptions::default()).is_err());
        assert!(solve_locked(&cfg, (&[f64::NAN; 20], 0.0), &SolverOptions::default()).is_err());
    }
}
