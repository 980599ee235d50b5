use nalgebra::DMatrix;

use crate::model::{coupling_sums, ModelConfig};

/// Jacobian of the co-rotating field at a profile `ϑ`.
///
/// Off-diagonal `(K/N)·S(ϑ_i)·cos(ϑ_ℓ − ϑ_i)`; diagonal
/// `(K/N)·(S'(ϑ_i)·Σ_j sin(ϑ_j − ϑ_i) − S(ϑ_i)·Σ_{j≠i} cos(ϑ_j − ϑ_i))`.
pub fn jacobian(cfg: &ModelConfig, vartheta: &[f64]) -> DMatrix<f64> {
    let n = vartheta.len();
    let scale = cfg.coupling / n as f64;
    let sums = coupling_sums(vartheta);
    let mut j = DMatrix::zeros(n, n);
    for i in 0..n {
        let s = cfg.gate.value(vartheta[i]);
        let ds = cfg.gate.derivative(vartheta[i]);
        let mut cos_sum = 0.0;
        for l in 0..n {
            if l == i {
                continue;
            }
            let c = (vartheta[l] - vartheta[i]).cos();
            cos_sum += c;
            j[(i, l)] = scale * s * c;
        }
        j[(i, i)] = scale * (ds * sums[i] - s * cos_sum);
    }
    j
}

/// Diagonal entries rewritten through the balance relation at a locked state:
/// `(S'(ϑ_i)/S(ϑ_i))·(Ω − ω_i) − (K/N)·S(ϑ_i)·Σ_{j≠i} cos(ϑ_j − ϑ_i)`.
pub fn jacobian_diagonal_from_balance(cfg: &ModelConfig, vartheta: &[f64], omega: f64) -> Vec<f64> {
    let n = vartheta.len();
    let scale = cfg.coupling / n as f64;
    (0..n)
        .map(|i| {
            let s = cfg.gate.value(vartheta[i]);
            let ds = cfg.gate.derivative(vartheta[i]);
            let cos_sum: f64 = (0..n).filter(|&j| j != i).map(|j| (vartheta[j] - vartheta[i]).cos()).sum();
            ds / s * (omega - cfg.omega[i]) - scale * s * cos_sum
        })
        .collect()
}
