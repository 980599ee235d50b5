use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{jacobian, LockedProfile};
use crate::error::{Error, Result};
use crate::model::ModelConfig;

/// Eigenvalues smaller than this in modulus are neutral-mode candidates.
pub const NEUTRAL_EIGENVALUE: f64 = 1e-8;
/// Maximum angle between a neutral eigenvector and the uniform direction.
pub const NEUTRAL_ALIGNMENT: f64 = 1e-4;
/// Transverse abscissae within this margin of zero are `Marginal`.
pub const VERDICT_MARGIN: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityVerdict {
    Stable,
    Unstable,
    Marginal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub eigenvalues: Vec<Complex64>,
    /// Largest real part once the neutral mode, if any, is set aside.
    pub spectral_abscissa_transverse: f64,
    pub verdict: StabilityVerdict,
    /// Index into `eigenvalues` of the detected rotation mode.
    pub neutral_mode: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// Unit right null vector of `m` (smallest singular direction).
fn null_direction(m: DMatrix<f64>) -> Option<Vec<f64>> {
    let svd = m.svd(false, true);
    let vt = svd.v_t?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    Some(vt.row(idx).iter().copied().collect())
}

fn angle_to_uniform(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return std::f64::consts::FRAC_PI_2;
    }
    let cos = (v.iter().sum::<f64>().abs() / (norm * n.sqrt())).min(1.0);
    // acos loses precision near 1; use the orthogonal component instead
    let mean = v.iter().sum::<f64>() / n;
    let perp = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>().sqrt() / norm;
    perp.atan2(cos)
}

/// Spectrum of the locked-state Jacobian from a real Schur decomposition and
/// the resulting local stability verdict.
pub fn stability(cfg: &ModelConfig, profile: &LockedProfile) -> Result<StabilityReport> {
    if !profile.converged {
        return Err(Error::PreconditionViolated("stability requires a converged locked profile".into()));
    }
    let j = jacobian(cfg, &profile.vartheta);
    Ok(spectrum_report(&j))
}

pub(crate) fn spectrum_report(j: &DMatrix<f64>) -> StabilityReport {
    let n = j.nrows();
    let scale = j.amax().max(1.0);
    let Some(schur) = Schur::try_new(j.clone(), 1e-15 * scale, 10_000) else {
        return StabilityReport {
            eigenvalues: Vec::new(),
            spectral_abscissa_transverse: f64::NAN,
            verdict: StabilityVerdict::Marginal,
            neutral_mode: None,
            diagnostic: Some(Error::EigenFailure.to_string()),
        };
    };
    let eigenvalues: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();

    let mut neutral_mode = None;
    let mut candidates: Vec<usize> = (0..n).filter(|&i| eigenvalues[i].norm() < NEUTRAL_EIGENVALUE).collect();
    candidates.sort_by(|&a, &b| eigenvalues[a].norm().total_cmp(&eigenvalues[b].norm()));
    for i in candidates {
        let shifted = j - DMatrix::identity(n, n) * eigenvalues[i].re;
        if let Some(v) = null_direction(shifted) {
            if angle_to_uniform(&v) < NEUTRAL_ALIGNMENT {
                neutral_mode = Some(i);
                break;
            }
        }
    }
    let abscissa = eigenvalues
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != neutral_mode)
        .map(|(_, z)| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let verdict = if abscissa < -VERDICT_MARGIN {
        StabilityVerdict::Stable
    } else if abscissa > VERDICT_MARGIN {
        StabilityVerdict::Unstable
    } else {
        StabilityVerdict::Marginal
    };
    StabilityReport { eigenvalues, spectral_abscissa_transverse: abscissa, verdict, neutral_mode, diagnostic: None }
}
