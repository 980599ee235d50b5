use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseKFit {
    pub c: f64,
    /// `sqrt(mean(((T − c/K)/T)²))`.
    pub rel_rmse: f64,
}

/// Least-squares fit of `T = c/K`: minimizing `Σ (T_i − c/K_i)²` gives
/// `c = Σ(T_i/K_i) / Σ(1/K_i²)`.
pub fn fit_inverse_k(points: &[(f64, f64)]) -> Result<InverseKFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|&(k, t)| !(k > 0.0 && k.is_finite()) || !t.is_finite()) {
        return Err(Error::DegenerateFit("K must be positive and T finite".into()));
    }
    let k0 = points[0].0;
    if points.iter().all(|&(k, _)| k == k0) {
        return Err(Error::DegenerateFit("all K values are equal".into()));
    }
    let num: f64 = points.iter().map(|&(k, t)| t / k).sum();
    let den: f64 = points.iter().map(|&(k, _)| 1.0 / (k * k)).sum();
    let c = num / den;
    let ms = points.iter().map(|&(k, t)| ((t - c / k) / t).powi(2)).sum::<f64>() / points.len() as f64;
    Ok(InverseKFit { c, rel_rmse: ms.sqrt() })
}
