use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::sweep::{hex, par_map};
use super::{
    atomic_write, fit_inverse_k, robustness_sweep_k_n, rows_to_csv, run_experiment, Axis, Execution, InitSpec,
    ModelSpec, Pipeline, PointConfig, SweepParam, SweepSpec, ROBUSTNESS_K, ROBUSTNESS_N,
};
use crate::error::{Error, Result};
use crate::gate::{GateFrame, GateParams};
use crate::integrator::IntegrationConfig;
use crate::model::FrequencySpec;
use crate::phase::wrapped_distance;

/// Run length for Poincaré-based regime maps. The locking classifier needs
/// transients to have decayed below its lock tolerance, which near the
/// transition takes far longer than the 1000 time units of a plain
/// simulation.
pub const POINCARE_T_END: f64 = 20_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig2,
    Fig4,
    Fig5,
    #[serde(rename = "figS1")]
    FigS1,
}

impl FigureId {
    pub const ALL: [FigureId; 4] = [FigureId::Fig2, FigureId::Fig4, FigureId::Fig5, FigureId::FigS1];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::FigS1 => "figS1",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown figure id {s:?} (expected fig2, fig4, fig5 or figS1)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub figure: FigureId,
    pub seed: u64,
    pub files: Vec<ManifestEntry>,
}

struct Bundle<'a> {
    dir: &'a Path,
    figure: FigureId,
    files: Vec<ManifestEntry>,
}

impl Bundle<'_> {
    fn write(&mut self, panel: &str, text: String, config: serde_json::Value) -> Result<()> {
        let file = format!("{}_{panel}.csv", self.figure);
        atomic_write(&self.dir.join(&file), text.as_bytes())?;
        self.files.push(ManifestEntry { file, sha256: hex(&Sha256::digest(text.as_bytes())), config });
        Ok(())
    }
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("config serializes")
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

fn identical_base(coupling: f64, w: f64, seed: u64, t_end: f64) -> PointConfig {
    PointConfig {
        model: ModelSpec { n: 20, coupling, omega: FrequencySpec::Identical(24.0) },
        gate: GateParams::new(0.0, w, 10.0),
        init: InitSpec::UniformRandom { seed },
        integration: IntegrationConfig::new(0.0, t_end),
        pipeline: Pipeline::convergence(),
    }
}

fn heterogeneous_base(coupling: f64, seed: u64, t_end: f64) -> PointConfig {
    PointConfig {
        model: ModelSpec { n: 20, coupling, omega: FrequencySpec::PeriodRange([23.0, 25.0]) },
        gate: GateParams::new(0.0, PI, 10.0).with_frame(GateFrame::MeanPhase),
        init: InitSpec::UniformRandom { seed },
        integration: IntegrationConfig::new(0.0, t_end),
        pipeline: Pipeline::poincare(),
    }
}

fn poincare_base(coupling: f64, seed: u64) -> PointConfig {
    let mut pc = heterogeneous_base(coupling, seed, POINCARE_T_END);
    pc.integration = pc.integration.with_sample_dt(10.0);
    pc
}

/// `R(t)` for each configuration, long format `label,t,R`.
fn r_series(label: &str, configs: &[(f64, PointConfig)], exec: Execution) -> Result<String> {
    let trajs = par_map(configs, exec, |(_, pc)| pc.simulate())?;
    let mut rows = Vec::new();
    for ((x, _), traj) in configs.iter().zip(trajs) {
        let traj = traj?;
        for (t, r) in traj.times.iter().zip(&traj.r_series) {
            rows.push(vec![x.to_string(), t.to_string(), r.to_string()]);
        }
    }
    Ok(csv_text(&[label, "t", "R"], rows))
}

/// Retained crossings of oscillator 1 for each configuration, long format.
fn crossings(labels: &[&str], configs: &[(Vec<f64>, PointConfig)], exec: Execution) -> Result<String> {
    let recs = par_map(configs, exec, |(_, pc)| pc.poincare_record())?;
    let mut rows = Vec::new();
    for ((key, _), rec) in configs.iter().zip(recs) {
        let rec = rec?;
        for c in rec.retained() {
            let mut row: Vec<String> = key.iter().map(|v| v.to_string()).collect();
            row.push(c.t.to_string());
            row.push(c.rel_phases[0].to_string());
            rows.push(row);
        }
    }
    let mut header = labels.to_vec();
    header.extend(["t_cross", "gap"]);
    Ok(csv_text(&header, rows))
}

/// Regenerates the data behind one figure into `dir` and writes
/// `<figure>_manifest.json` listing every file with its hash and config.
pub fn run_figure(id: FigureId, dir: &Path, seed: u64, exec: Execution) -> Result<Manifest> {
    std::fs::create_dir_all(dir)?;
    let mut b = Bundle { dir, figure: id, files: Vec::new() };
    match id {
        FigureId::Fig2 => fig2(&mut b, seed, exec)?,
        FigureId::Fig4 => fig4(&mut b, seed, exec)?,
        FigureId::Fig5 => fig5(&mut b, seed, exec)?,
        FigureId::FigS1 => fig_s1(&mut b, seed, exec)?,
    }
    let manifest = Manifest { figure: id, seed, files: b.files };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    atomic_write(&dir.join(format!("{id}_manifest.json")), text.as_bytes())?;
    Ok(manifest)
}

fn fig2(b: &mut Bundle<'_>, seed: u64, exec: Execution) -> Result<()> {
    let widths = [PI, 1.25 * PI, 1.5 * PI, 1.75 * PI, 2.0 * PI];
    let configs: Vec<_> = widths.iter().map(|&w| (w, identical_base(0.2, w, seed, 1000.0))).collect();
    b.write("A", r_series("w", &configs, exec)?, to_json(&configs))?;

    let spec = SweepSpec {
        base: identical_base(0.02, PI, seed, 40_000.0),
        axes: vec![Axis::new(SweepParam::W, grid(0.0, 2.0 * PI, PI / 8.0))],
        replicate_seeds: vec![seed],
    };
    b.write("B", rows_to_csv(&run_experiment(&spec, exec)?.rows), to_json(&spec))?;

    let ks = [0.05, 0.1, 0.2, 0.4];
    let configs: Vec<_> = ks.iter().map(|&k| (k, identical_base(k, PI, seed, 1000.0))).collect();
    b.write("C", r_series("K", &configs, exec)?, to_json(&configs))?;

    let spec = SweepSpec {
        base: identical_base(0.2, PI, seed, 2000.0),
        axes: vec![
            Axis::new(SweepParam::W, vec![PI, 1.25 * PI, 1.5 * PI]),
            Axis::new(SweepParam::K, vec![0.05, 0.1, 0.15, 0.2, 0.3, 0.4]),
        ],
        replicate_seeds: vec![seed],
    };
    let res = run_experiment(&spec, exec)?;
    b.write("D", rows_to_csv(&res.rows), to_json(&spec))?;
    let mut fits = Vec::new();
    for chunk in res.rows.chunks(6) {
        let pts: Vec<(f64, f64)> = chunk.iter().filter_map(|r| Some((r.coupling, r.outcome.t_conv?))).collect();
        let w = chunk[0].w.unwrap_or(0.0);
        match fit_inverse_k(&pts) {
            Ok(f) => fits.push(vec![w.to_string(), f.c.to_string(), f.rel_rmse.to_string(), String::new()]),
            Err(e) => fits.push(vec![w.to_string(), String::new(), String::new(), e.to_string()]),
        }
    }
    b.write("D_fit", csv_text(&["w", "c", "rel_rmse", "error"], fits), to_json(&spec))
}

fn fig4(b: &mut Bundle<'_>, seed: u64, exec: Execution) -> Result<()> {
    let panels = [("A", None), ("B", Some(PI / 2.0)), ("C", Some(PI))];
    let configs: Vec<PointConfig> = panels
        .iter()
        .map(|&(_, w)| {
            let mut pc = heterogeneous_base(0.02, seed, 1000.0);
            pc.integration = pc.integration.with_sample_dt(1.0);
            pc.pipeline = Pipeline::Simulate { tol: crate::analysis::DEFAULT_CONVERGENCE_TOL };
            match w {
                Some(w) => pc.gate.w = w,
                None => pc.gate.enabled = false,
            }
            pc
        })
        .collect();
    let trajs = par_map(&configs, exec, PointConfig::simulate)?;
    let mut offsets = Vec::new();
    for ((panel, _), (pc, traj)) in panels.iter().zip(configs.iter().zip(trajs)) {
        let traj = traj?;
        let mut buf = Vec::new();
        traj.write_csv(&mut buf)?;
        b.write(panel, String::from_utf8(buf).expect("utf-8 csv"), to_json(pc))?;
        let psi = traj.psi_series.last().copied().unwrap_or(0.0);
        let omega = pc.model_config()?.omega;
        for (i, &th) in traj.final_state().iter().enumerate() {
            offsets.push(vec![
                panel.to_string(),
                (i + 1).to_string(),
                (std::f64::consts::TAU / omega[i]).to_string(),
                wrapped_distance(th, psi).to_string(),
            ]);
        }
    }
    b.write("offsets", csv_text(&["panel", "i", "period", "offset"], offsets), to_json(&configs))
}

fn fig5(b: &mut Bundle<'_>, seed: u64, exec: Execution) -> Result<()> {
    let spec = SweepSpec {
        base: poincare_base(0.02, seed),
        axes: vec![
            Axis::new(SweepParam::K, vec![0.01, 0.02, 0.04, 0.08, 0.12, 0.16, 0.2]),
            Axis::new(SweepParam::W, grid(0.0, PI, 0.1)),
        ],
        replicate_seeds: vec![seed],
    };
    b.write("A", rows_to_csv(&run_experiment(&spec, exec)?.rows), to_json(&spec))?;
    for (panel, k) in [("B", 0.02), ("C", 0.04), ("D", 0.2)] {
        let configs: Vec<(Vec<f64>, PointConfig)> = grid(0.0, PI, 0.05)
            .into_iter()
            .map(|w| {
                let mut pc = poincare_base(k, seed);
                if w == 0.0 {
                    pc.gate.enabled = false;
                } else {
                    pc.gate.w = w;
                }
                (vec![w], pc)
            })
            .collect();
        let cfg_json = to_json(&configs.iter().map(|(_, pc)| pc).collect::<Vec<_>>());
        b.write(panel, crossings(&["w"], &configs, exec)?, cfg_json)?;
    }
    Ok(())
}

fn fig_s1(b: &mut Bundle<'_>, seed: u64, exec: Execution) -> Result<()> {
    let gates: Vec<GateParams> = [0.0, 2.0, 10.0].iter().map(|&k| GateParams::new(0.0, PI, k)).collect();
    let rows = (0..720).map(|i| {
        let th = std::f64::consts::TAU * i as f64 / 720.0;
        let mut row = vec![th.to_string()];
        row.extend(gates.iter().map(|g| g.value(th).to_string()));
        row
    });
    b.write("A", csv_text(&["theta", "S_k0", "S_k2", "S_k10"], rows), to_json(&gates))?;

    let base = poincare_base(0.02, seed);
    let widths = grid(0.0, PI, 0.1);
    let res = robustness_sweep_k_n(&base, &ROBUSTNESS_K, &ROBUSTNESS_N, &widths, seed, exec)?;
    let curves = res.curves_csv();
    let (by_k, by_n): (Vec<&str>, Vec<&str>) = {
        let mut lines = curves.lines();
        let header = lines.next().unwrap_or_default();
        let body: Vec<&str> = lines.collect();
        let split = res.by_k.len() * widths.len();
        let mut k = vec![header];
        k.extend(&body[..split]);
        let mut n = vec![header];
        n.extend(&body[split..]);
        (k, n)
    };
    let cfg = serde_json::json!({ "base": to_json(&base), "widths": widths, "k": ROBUSTNESS_K, "N": ROBUSTNESS_N });
    b.write("B", by_k.join("\n") + "\n", cfg.clone())?;

    let configs: Vec<(Vec<f64>, PointConfig)> = [20usize, 200]
        .iter()
        .flat_map(|&n| {
            grid(0.0, PI, 0.2).into_iter().map(move |w| {
                let mut pc = poincare_base(0.02, seed);
                pc.model.n = n;
                if w == 0.0 {
                    pc.gate.enabled = false;
                } else {
                    pc.gate.w = w;
                }
                (vec![n as f64, w], pc)
            })
        })
        .collect();
    let cfg_c = to_json(&configs.iter().map(|(_, pc)| pc).collect::<Vec<_>>());
    b.write("C", crossings(&["N", "w"], &configs, exec)?, cfg_c)?;
    b.write("D", by_n.join("\n") + "\n", cfg)
}
