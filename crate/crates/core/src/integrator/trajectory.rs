use std::io::Write;

use serde::Serialize;

use super::{IntegrationConfig, StepStats};
use crate::model::ModelConfig;
use crate::order::order_parameter;
use crate::phase::canonicalize;

/// Sampled solution. `states` holds unwrapped phases, one row per sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub r_series: Vec<f64>,
    pub psi_series: Vec<f64>,
    pub model: ModelConfig,
    pub integration: IntegrationConfig,
    #[serde(skip)]
    pub stats: StepStats,
}

impl Trajectory {
    pub(crate) fn with_capacity(model: ModelConfig, integration: IntegrationConfig, cap: usize) -> Self {
        Trajectory {
            times: Vec::with_capacity(cap),
            states: Vec::with_capacity(cap),
            r_series: Vec::with_capacity(cap),
            psi_series: Vec::with_capacity(cap),
            model,
            integration,
            stats: StepStats::default(),
        }
    }

    pub(crate) fn push(&mut self, t: f64, state: Vec<f64>) {
        let op = order_parameter(&state);
        self.times.push(t);
        self.r_series.push(op.r);
        self.psi_series.push(op.psi.value());
        self.states.push(state);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn final_r(&self) -> f64 {
        self.r_series.last().copied().unwrap_or(f64::NAN)
    }

    /// CSV with header `t,R,psi,theta_1,...,theta_N`, phases reduced to
    /// `[0, 2π)`, all numbers with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let n = self.model.n();
        let mut header = String::from("t,R,psi");
        for i in 1..=n {
            header.push_str(&format!(",theta_{i}"));
        }
        writeln!(w, "{header}")?;
        for s in 0..self.len() {
            let mut line = format!(
                "{},{},{}",
                fmt17(self.times[s]),
                fmt17(self.r_series[s]),
                fmt17(self.psi_series[s])
            );
            for &th in &self.states[s] {
                line.push(',');
                line.push_str(&fmt17(canonicalize(th)));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
