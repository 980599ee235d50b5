use serde::{Deserialize, Serialize};

use super::{run_experiment, Axis, Execution, PointConfig, SweepParam, SweepRow, SweepSpec};
use crate::error::Result;

/// Gate sharpness values of the robustness study.
pub const ROBUSTNESS_K: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 10.0];
/// Population sizes of the robustness study.
pub const ROBUSTNESS_N: [usize; 4] = [10, 20, 50, 200];

/// Steady `θ_1 − ψ` against dead-zone width for one `(k, N)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCurve {
    pub k: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub w: Vec<f64>,
    pub verdict: Vec<Option<String>>,
    pub steady_gap: Vec<Option<f64>>,
}

impl GapCurve {
    fn from_rows(k: f64, n: usize, widths: &[f64], rows: &[&SweepRow]) -> Self {
        GapCurve {
            k,
            n,
            w: widths.to_vec(),
            verdict: rows.iter().map(|r| r.outcome.verdict.clone()).collect(),
            steady_gap: rows.iter().map(|r| r.outcome.steady_gap).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessResult {
    /// One curve per `k` at the base `N`.
    pub by_k: Vec<GapCurve>,
    /// One curve per `N` at the base `k`.
    pub by_n: Vec<GapCurve>,
    pub rows_k: Vec<SweepRow>,
    pub rows_n: Vec<SweepRow>,
}

impl RobustnessResult {
    /// Long-format CSV `k,N,w,verdict,steady_gap` over all curves.
    pub fn curves_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["k", "N", "w", "verdict", "steady_gap"]).expect("in-memory write");
        for c in self.by_k.iter().chain(&self.by_n) {
            for i in 0..c.w.len() {
                w.write_record([
                    c.k.to_string(),
                    c.n.to_string(),
                    c.w[i].to_string(),
                    c.verdict[i].clone().unwrap_or_default(),
                    c.steady_gap[i].map(|g| g.to_string()).unwrap_or_default(),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

/// Steady-gap curves over `widths` for each sharpness in `ks` (population
/// size held at `base`) and each size in `ns` (sharpness held at `base`).
/// `base` should carry a Poincaré pipeline.
pub fn robustness_sweep_k_n(
    base: &PointConfig,
    ks: &[f64],
    ns: &[usize],
    widths: &[f64],
    master_seed: u64,
    exec: Execution,
) -> Result<RobustnessResult> {
    let family = |axis: Axis| -> Result<Vec<SweepRow>> {
        let spec = SweepSpec {
            base: base.clone(),
            axes: vec![axis, Axis::new(SweepParam::W, widths.to_vec())],
            replicate_seeds: vec![master_seed],
        };
        Ok(run_experiment(&spec, exec)?.rows)
    };
    let rows_k = family(Axis::new(SweepParam::Sharpness, ks.to_vec()))?;
    let rows_n = family(Axis::new(SweepParam::N, ns.iter().map(|&n| n as f64).collect()))?;
    let chunk = widths.len();
    let by_k = ks
        .iter()
        .zip(rows_k.chunks(chunk))
        .map(|(&k, rows)| GapCurve::from_rows(k, base.model.n, widths, &rows.iter().collect::<Vec<_>>()))
        .collect();
    let by_n = ns
        .iter()
        .zip(rows_n.chunks(chunk))
        .map(|(&n, rows)| GapCurve::from_rows(base.gate.k, n, widths, &rows.iter().collect::<Vec<_>>()))
        .collect();
    Ok(RobustnessResult { by_k, by_n, rows_k, rows_n })
}
