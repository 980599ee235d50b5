//! Adaptive integration of the gated system with sampled output and
//! mean-phase section crossings.
//!
//! Phases are carried as unwrapped reals throughout; they are only reduced
//! to `[0, 2π)` when written out.

pub mod dopri;
mod trajectory;

use std::f64::consts::{FRAC_PI_8, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rhs_into, ModelConfig};
use crate::order::order_parameter;
use crate::phase::{wrapped_distance, Phase};

pub use dopri::{Segment, StepStats, StepperOptions};
pub use trajectory::{fmt17, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationConfig {
    #[serde(default)]
    pub t0: f64,
    pub t_end: f64,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    /// Defaults to a tenth of the integration span.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(default = "default_sample_dt")]
    pub sample_dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_step: Option<f64>,
}

fn default_rtol() -> f64 {
    1e-8
}
fn default_atol() -> f64 {
    1e-10
}
fn default_sample_dt() -> f64 {
    0.5
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig::new(0.0, 1000.0)
    }
}

impl IntegrationConfig {
    pub fn new(t0: f64, t_end: f64) -> Self {
        IntegrationConfig {
            t0,
            t_end,
            rtol: default_rtol(),
            atol: default_atol(),
            max_step: None,
            sample_dt: default_sample_dt(),
            initial_step: None,
        }
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn with_sample_dt(mut self, dt: f64) -> Self {
        self.sample_dt = dt;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.t0.is_finite()
            && self.t_end.is_finite()
            && self.t_end > self.t0
            && self.rtol > 0.0
            && self.atol > 0.0
            && self.sample_dt > 0.0
            && self.max_step.is_none_or(|h| h > 0.0)
            && self.initial_step.is_none_or(|h| h > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid integration settings: {self:?}")))
        }
    }

    pub fn stepper_options(&self) -> StepperOptions {
        StepperOptions {
            rtol: self.rtol,
            atol: self.atol,
            max_step: self.max_step.unwrap_or((self.t_end - self.t0) / 10.0),
            initial_step: self.initial_step,
            scale_cap: std::f64::consts::TAU,
        }
    }

    /// Number of output samples, including the initial one.
    fn sample_count(&self) -> usize {
        ((self.t_end - self.t0) / self.sample_dt * (1.0 + 1e-12)).floor() as usize + 1
    }

    fn sample_time(&self, m: usize) -> f64 {
        (self.t0 + m as f64 * self.sample_dt).min(self.t_end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Increasing,
    Decreasing,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    /// The population mean phase passes through the given value.
    MeanPhaseEquals(Phase),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub section: Section,
    pub direction: Direction,
    /// Bisection tolerance on the crossing time.
    pub refine_tol: f64,
}

impl EventSpec {
    pub fn mean_phase(target: f64) -> Self {
        EventSpec {
            section: Section::MeanPhaseEquals(Phase::new(target)),
            direction: Direction::Increasing,
            refine_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub t: f64,
    /// Unwrapped phases at the crossing.
    pub state: Vec<f64>,
}

fn check_inputs(cfg: &ModelConfig, icfg: &IntegrationConfig, y0: &[f64]) -> Result<()> {
    cfg.validate()?;
    icfg.validate()?;
    if y0.len() != cfg.n() {
        return Err(Error::InvalidConfig(format!(
            "initial state has length {} but N = {}",
            y0.len(),
            cfg.n()
        )));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("initial state must be finite".into()));
    }
    Ok(())
}

/// Integrates the gated model and samples it on `t0 + m·sample_dt`.
pub fn integrate(cfg: &ModelConfig, icfg: &IntegrationConfig, y0: &[f64]) -> Result<Trajectory> {
    integrate_inner(cfg, icfg, y0, None).map(|(traj, _)| traj)
}

/// As [`integrate`], additionally locating every crossing of the event
/// section. Crossing states are dense-output interpolants at the refined time.
pub fn integrate_with_events(
    cfg: &ModelConfig,
    icfg: &IntegrationConfig,
    y0: &[f64],
    ev: &EventSpec,
) -> Result<(Trajectory, Vec<Crossing>)> {
    if !(ev.refine_tol > 0.0) {
        return Err(Error::InvalidConfig("event refine_tol must be positive".into()));
    }
    integrate_inner(cfg, icfg, y0, Some(ev))
}

fn integrate_inner(
    cfg: &ModelConfig,
    icfg: &IntegrationConfig,
    y0: &[f64],
    ev: Option<&EventSpec>,
) -> Result<(Trajectory, Vec<Crossing>)> {
    check_inputs(cfg, icfg, y0)?;
    let n = cfg.n();
    let total = icfg.sample_count();
    let mut traj = Trajectory::with_capacity(cfg.clone(), *icfg, total);
    traj.push(icfg.t0, y0.to_vec());
    let mut next = 1usize;
    let mut crossings = Vec::new();
    let mut scratch = vec![0.0; n];

    let stats = dopri::solve(
        |t, y, dy| rhs_into(cfg, t, y, dy),
        icfg.t0,
        icfg.t_end,
        y0,
        &icfg.stepper_options(),
        |seg| {
            let t1 = seg.t_end();
            while next < total {
                let ts = icfg.sample_time(next);
                if ts > t1 {
                    break;
                }
                seg.eval_into(ts, &mut scratch);
                traj.push(ts, scratch.clone());
                next += 1;
            }
            if let Some(ev) = ev {
                detect_crossings(seg, ev, &mut crossings);
            }
            Ok(())
        },
    )?;
    // guard against the final sample falling a rounding error past t_end
    while next < total {
        let last = traj.states.last().cloned().expect("initial sample present");
        traj.push(icfg.sample_time(next), last);
        next += 1;
    }
    traj.stats = stats;
    Ok((traj, crossings))
}

fn section_residual(section: &Section, state: &[f64]) -> Option<f64> {
    match section {
        Section::MeanPhaseEquals(target) => {
            let op = order_parameter(state);
            (!op.degenerate).then(|| wrapped_distance(op.psi.value(), target.value()))
        }
    }
}

fn detect_crossings(seg: &Segment<'_>, ev: &EventSpec, out: &mut Vec<Crossing>) {
    // subdivide so no phase advances more than π/8 between probes
    let max_advance = seg
        .y_start
        .iter()
        .zip(seg.y_end)
        .map(|(a, b)| (b - a).abs())
        .fold(0.0f64, f64::max);
    let pieces = ((max_advance / FRAC_PI_8).ceil() as usize).clamp(1, 4096);
    let g_at = |t: f64| section_residual(&ev.section, &seg.eval(t));

    let mut t_lo = seg.t_start;
    let mut g_lo = section_residual(&ev.section, seg.y_start);
    for p in 1..=pieces {
        let t_hi = if p == pieces { seg.t_end() } else { seg.t_start + seg.h * p as f64 / pieces as f64 };
        let g_hi = if p == pieces { section_residual(&ev.section, seg.y_end) } else { g_at(t_hi) };
        if let (Some(a), Some(b)) = (g_lo, g_hi) {
            let rising = a < 0.0 && b >= 0.0;
            let falling = a > 0.0 && b <= 0.0;
            // a jump of ~2π is the seam opposite the target, not a crossing
            let genuine = (b - a).abs() < PI;
            let wanted = match ev.direction {
                Direction::Increasing => rising,
                Direction::Decreasing => falling,
                Direction::Both => rising || falling,
            };
            if genuine && wanted {
                let t = bisect(&g_at, t_lo, t_hi, a, ev.refine_tol);
                out.push(Crossing { t, state: seg.eval(t) });
            }
        }
        t_lo = t_hi;
        g_lo = g_hi;
    }
}

fn bisect<G: Fn(f64) -> Option<f64>>(g: &G, mut lo: f64, mut hi: f64, g_lo: f64, tol: f64) -> f64 {
    let lo_negative = g_lo < 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match g(mid) {
            Some(v) if (v < 0.0) == lo_negative && v != 0.0 => lo = mid,
            _ => hi = mid,
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::GateParams;
    use std::f64::consts::TAU;

    fn uncoupled(omega: Vec<f64>) -> ModelConfig {
        ModelConfig::new(0.0, omega, GateParams::disabled()).unwrap()
    }

    #[test]
    fn uncoupled_flow_is_linear() {
        let omega = vec![0.26, 0.27, 0.3, -0.1];
        let cfg = uncoupled(omega.clone());
        let y0 = vec![0.1, 2.0, 4.0, 5.5];
        let traj = integrate(&cfg, &IntegrationConfig::new(0.0, 1000.0), &y0).unwrap();
        assert_eq!(traj.times.len(), 2001);
        let mut worst = 0.0f64;
        for (t, s) in traj.times.iter().zip(&traj.states) {
            for i in 0..4 {
                worst = worst.max((s[i] - (y0[i] + omega[i] * t)).abs());
            }
        }
        assert!(worst <= 1e-6, "max error {worst:e}");
    }

    #[test]
    fn sample_grid_is_exact_multiples() {
        let cfg = uncoupled(vec![1.0, 2.0]);
        let icfg = IntegrationConfig::new(0.0, 10.0).with_sample_dt(0.3);
        let traj = integrate(&cfg, &icfg, &[0.0, 0.0]).unwrap();
        assert_eq!(traj.times.len(), 34);
        for (m, t) in traj.times.iter().enumerate() {
            assert_eq!(*t, m as f64 * 0.3);
        }
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn uniform_rotation_crossings() {
        let w = TAU / 24.0;
        let cfg = uncoupled(vec![w, w, w]);
        let y0 = vec![0.3, 0.3, 0.3];
        let (_, cr) = integrate_with_events(&cfg, &IntegrationConfig::new(0.0, 300.0), &y0, &EventSpec::mean_phase(PI)).unwrap();
        assert!(cr.len() >= 12);
        for pair in cr.windows(2) {
            assert!((pair[1].t - pair[0].t - 24.0).abs() < 1e-6);
        }
        let first = (PI - 0.3) / w;
        assert!((cr[0].t - first).abs() < 1e-6);
        for c in &cr {
            let op = order_parameter(&c.state);
            assert!(wrapped_distance(op.psi.value(), PI).abs() <= 1e-8);
        }
    }

    #[test]
    fn decreasing_direction_on_reverse_rotation() {
        let cfg = uncoupled(vec![-0.5, -0.5]);
        let icfg = IntegrationConfig::new(0.0, 100.0);
        let inc = EventSpec::mean_phase(1.0);
        let (_, up) = integrate_with_events(&cfg, &icfg, &[0.0, 0.0], &inc).unwrap();
        assert!(up.is_empty());
        let dec = EventSpec { direction: Direction::Decreasing, ..inc };
        let (_, down) = integrate_with_events(&cfg, &icfg, &[0.0, 0.0], &dec).unwrap();
        assert_eq!(down.len(), 8);
        let both = EventSpec { direction: Direction::Both, ..inc };
        let (_, all) = integrate_with_events(&cfg, &icfg, &[0.0, 0.0], &both).unwrap();
        assert_eq!(all.len(), 8);
    }

    #[test]
    fn stationary_mean_phase_has_no_crossings() {
        let cfg = uncoupled(vec![0.0, 0.0, 0.0]);
        let (_, cr) =
            integrate_with_events(&cfg, &IntegrationConfig::new(0.0, 50.0), &[0.2, 0.4, 0.6], &EventSpec::mean_phase(PI)).unwrap();
        assert!(cr.is_empty());
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = uncoupled(vec![0.0, 0.0]);
        assert!(integrate(&cfg, &IntegrationConfig::new(0.0, 1.0), &[0.0]).is_err());
        assert!(integrate(&cfg, &IntegrationConfig::new(1.0, 1.0), &[0.0, 0.0]).is_err());
        let bad = IntegrationConfig { rtol: 0.0, ..IntegrationConfig::new(0.0, 1.0) };
        assert!(integrate(&cfg, &bad, &[0.0, 0.0]).is_err());
    }
}
