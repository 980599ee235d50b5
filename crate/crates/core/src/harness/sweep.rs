use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{derive_seed, run_point, PointConfig, PointOutcome};
use crate::error::{Error, Result};
use crate::gate::GateParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    /// Coupling strength.
    K,
    /// Dead-zone width. A value of 0 selects the ungated model.
    #[serde(rename = "w")]
    W,
    /// Gate sharpness.
    #[serde(rename = "k")]
    Sharpness,
    /// Population size.
    N,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(param: SweepParam, values: Vec<f64>) -> Self {
        Axis { param, values }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: PointConfig,
    #[serde(default)]
    pub axes: Vec<Axis>,
    /// Master seed per replicate. Empty means one replicate keyed by the
    /// base init seed.
    #[serde(default)]
    pub replicate_seeds: Vec<u64>,
}

/// One sweep record. `grid_idx` is the row-major position over the axes
/// with the replicate index varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub grid_idx: usize,
    pub indices: Vec<usize>,
    pub replicate: usize,
    #[serde(rename = "K")]
    pub coupling: f64,
    pub w: Option<f64>,
    pub k: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: Option<u64>,
    pub outcome: PointOutcome,
    pub config_json: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// One worker per core. Without the `parallel` feature both parallel
    /// modes run sequentially.
    #[default]
    Parallel,
    /// Worker pool capped at the given size.
    ParallelJobs(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// False when the run stopped early and points remain.
    pub complete: bool,
    pub total_points: usize,
}

impl SweepResult {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.outcome.error.is_some()).count()
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        for ax in &self.axes {
            if ax.values.is_empty() {
                return Err(Error::InvalidConfig(format!("axis {:?} has no values", ax.param)));
            }
            if ax.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(format!("axis {:?} has non-finite values", ax.param)));
            }
            if ax.param == SweepParam::N && ax.values.iter().any(|v| *v < 1.0 || v.fract() != 0.0) {
                return Err(Error::InvalidConfig("N axis values must be positive integers".into()));
            }
        }
        Ok(())
    }

    fn replicates(&self) -> Vec<u64> {
        if self.replicate_seeds.is_empty() {
            vec![self.base.init.seed().unwrap_or(0)]
        } else {
            self.replicate_seeds.clone()
        }
    }

    pub fn total_points(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product::<usize>() * self.replicates().len()
    }

    /// Axis indices and replicate for a linear grid index.
    fn unravel(&self, mut idx: usize) -> (Vec<usize>, usize) {
        let reps = self.replicates().len();
        let replicate = idx % reps;
        idx /= reps;
        let mut indices = vec![0; self.axes.len()];
        for (slot, ax) in indices.iter_mut().zip(&self.axes).rev() {
            *slot = idx % ax.values.len();
            idx /= ax.values.len();
        }
        (indices, replicate)
    }

    /// Fully resolved configuration of one grid point.
    pub fn point(&self, grid_idx: usize) -> (PointConfig, Vec<usize>, usize) {
        let (indices, replicate) = self.unravel(grid_idx);
        let mut pc = self.base.clone();
        for (ax, &i) in self.axes.iter().zip(&indices) {
            let v = ax.values[i];
            match ax.param {
                SweepParam::K => pc.model.coupling = v,
                SweepParam::N => pc.model.n = v as usize,
                SweepParam::Sharpness => pc.gate.k = v,
                SweepParam::W => {
                    if v == 0.0 {
                        pc.gate = GateParams { enabled: false, ..pc.gate };
                    } else {
                        pc.gate = GateParams { w: v, enabled: true, ..pc.gate };
                    }
                }
            }
        }
        let master = self.replicates()[replicate];
        pc.init = pc.init.reseeded(derive_seed(master, &indices, replicate));
        (pc, indices, replicate)
    }

    fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        hex(&Sha256::digest(json.as_bytes()))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn evaluate(spec: &SweepSpec, grid_idx: usize) -> SweepRow {
    let (pc, indices, replicate) = spec.point(grid_idx);
    let outcome = run_point(&pc);
    SweepRow {
        grid_idx,
        indices,
        replicate,
        coupling: pc.model.coupling,
        w: pc.gate.enabled.then_some(pc.gate.w),
        k: pc.gate.k,
        n: pc.model.n,
        seed: pc.init.seed(),
        outcome,
        config_json: serde_json::to_string(&pc).expect("point config serializes"),
    }
}

/// Order-preserving map over `items` under the requested execution mode.
pub(crate) fn par_map<T, R, F>(items: &[T], exec: Execution, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let jobs = match exec {
            Execution::Sequential => None,
            Execution::Parallel => Some(0),
            Execution::ParallelJobs(j) => Some(j.max(1)),
        };
        if let Some(jobs) = jobs {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
            return Ok(pool.install(|| items.par_iter().map(&f).collect()));
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = exec;
    Ok(items.iter().map(f).collect())
}

/// Evaluates every grid point and returns rows sorted by grid index.
pub fn run_experiment(spec: &SweepSpec, exec: Execution) -> Result<SweepResult> {
    spec.validate()?;
    let points: Vec<usize> = (0..spec.total_points()).collect();
    let rows = par_map(&points, exec, |&i| evaluate(spec, i))?;
    Ok(SweepResult { rows, complete: true, total_points: points.len() })
}

#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    spec_sha256: String,
    total_points: usize,
}

/// Like [`run_experiment`], but appends each finished row to a JSON-lines
/// checkpoint and skips rows already present there. `stop_after` caps the
/// number of new points evaluated in this call (used to split a sweep
/// across sessions).
///
/// A torn final line, as left by a killed process, is ignored and its point
/// recomputed. A checkpoint written for a different spec is rejected.
pub fn run_experiment_resumable(
    spec: &SweepSpec,
    exec: Execution,
    checkpoint: &Path,
    stop_after: Option<usize>,
) -> Result<SweepResult> {
    spec.validate()?;
    let total = spec.total_points();
    let header = CheckpointHeader { spec_sha256: spec.fingerprint(), total_points: total };
    let mut done: BTreeMap<usize, SweepRow> = BTreeMap::new();

    if checkpoint.exists() {
        let reader = BufReader::new(File::open(checkpoint)?);
        let mut lines = reader.lines();
        match lines.next() {
            Some(line) => {
                let found: CheckpointHeader = serde_json::from_str(&line?)
                    .map_err(|e| Error::InvalidConfig(format!("unreadable checkpoint header: {e}")))?;
                if found.spec_sha256 != header.spec_sha256 {
                    return Err(Error::InvalidConfig("checkpoint belongs to a different sweep spec".into()));
                }
            }
            None => write_header(checkpoint, &header)?,
        }
        for line in lines {
            let line = line?;
            if let Ok(row) = serde_json::from_str::<SweepRow>(&line) {
                if row.grid_idx < total {
                    done.insert(row.grid_idx, row);
                }
            }
        }
        // drop a torn trailing line so appended rows start on a fresh line
        truncate_to_last_newline(checkpoint)?;
    } else {
        write_header(checkpoint, &header)?;
    }

    let mut pending: Vec<usize> = (0..total).filter(|i| !done.contains_key(i)).collect();
    if let Some(limit) = stop_after {
        pending.truncate(limit);
    }
    let file = Mutex::new(OpenOptions::new().append(true).open(checkpoint)?);
    let fresh = par_map(&pending, exec, |&i| {
        let row = evaluate(spec, i);
        let mut line = serde_json::to_string(&row).expect("row serializes");
        line.push('\n');
        let mut f = file.lock().unwrap_or_else(|p| p.into_inner());
        // a failed append only costs recomputation on resume
        let _ = f.write_all(line.as_bytes()).and_then(|_| f.flush());
        row
    })?;
    for row in fresh {
        done.insert(row.grid_idx, row);
    }
    let complete = done.len() == total;
    Ok(SweepResult { rows: done.into_values().collect(), complete, total_points: total })
}

fn write_header(path: &Path, header: &CheckpointHeader) -> Result<()> {
    let mut f = File::create(path)?;
    writeln!(f, "{}", serde_json::to_string(header).expect("header serializes"))?;
    f.flush()?;
    Ok(())
}

fn truncate_to_last_newline(path: &Path) -> Result<()> {
    let bytes = std::fs::read(path)?;
    let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
    if keep < bytes.len() {
        OpenOptions::new().write(true).open(path)?.set_len(keep as u64)?;
    }
    Ok(())
}
