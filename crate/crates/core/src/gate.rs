//! The receiver gate: a smooth double-sigmoid dead zone on the circle.
//!
//! `S(θ) = 1 − σ(k(d + w/2))·σ(k(w/2 − d))` with `d = d(θ, θ0)` the wrapped
//! distance to the dead-zone center. Inside the dead zone both logistic
//! factors are close to one and `S ≈ 0`; outside, `S ≈ 1`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order::order_parameter;
use crate::phase::{wrapped_distance, Phase};

/// Reference frame in which the gate argument is measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GateFrame {
    /// Laboratory frame: the gate sees `θ_i` directly.
    #[default]
    Fixed,
    /// Uniformly rotating reference `ψ(t) = Ω_ref·t + ψ0`.
    LinearReference { omega_ref: f64, psi0: Phase },
    /// Instantaneous mean phase `ψ = arg Σ e^{iθ_j}`.
    MeanPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateParams {
    /// Dead-zone center.
    pub theta0: Phase,
    /// Dead-zone width in radians.
    pub w: f64,
    /// Edge sharpness.
    pub k: f64,
    /// When false the gate is identically one.
    pub enabled: bool,
    #[serde(default)]
    pub frame: GateFrame,
}

impl Default for GateParams {
    fn default() -> Self {
        GateParams::disabled()
    }
}

impl GateParams {
    pub fn new(theta0: f64, w: f64, k: f64) -> Self {
        GateParams {
            theta0: Phase::new(theta0),
            w,
            k,
            enabled: true,
            frame: GateFrame::Fixed,
        }
    }

    /// A gate that lets every input through (`S ≡ 1`).
    pub fn disabled() -> Self {
        GateParams {
            theta0: Phase::ZERO,
            w: std::f64::consts::PI,
            k: 10.0,
            enabled: false,
            frame: GateFrame::Fixed,
        }
    }

    pub fn with_frame(mut self, frame: GateFrame) -> Self {
        self.frame = frame;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.enabled {
            return Ok(());
        }
        // w = 2π is admitted: the formula stays well defined and the
        // convergence figures sweep up to it.
        if !(self.w > 0.0 && self.w <= TAU) {
            return Err(Error::InvalidConfig(format!(
                "gate width must lie in (0, 2π], got {}",
                self.w
            )));
        }
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "gate sharpness must be finite and ≥ 0, got {}",
                self.k
            )));
        }
        if !self.theta0.value().is_finite() {
            return Err(Error::InvalidConfig("gate center must be finite".into()));
        }
        Ok(())
    }

    /// Gate value at a phase already expressed in the gate frame.
    #[inline]
    pub fn value(&self, theta_rel: f64) -> f64 {
        if !self.enabled {
            return 1.0;
        }
        let d = wrapped_distance(theta_rel, self.theta0.value());
        let a = self.k * (d + 0.5 * self.w);
        let b = self.k * (0.5 * self.w - d);
        one_minus_product(a, b)
    }

    /// Analytic `dS/dθ`; zero when the gate is disabled.
    #[inline]
    pub fn derivative(&self, theta_rel: f64) -> f64 {
        if !self.enabled {
            return 0.0;
        }
        let d = wrapped_distance(theta_rel, self.theta0.value());
        let a = self.k * (d + 0.5 * self.w);
        let b = self.k * (0.5 * self.w - d);
        let (sa, sb) = (logistic(a), logistic(b));
        // σ(b) − σ(a) written without cancellation
        let diff = sb * logistic(-a) - sa * logistic(-b);
        -self.k * sa * sb * diff
    }
}

/// `S` evaluated at a phase relative to the gate frame.
pub fn gate_value(g: &GateParams, theta_rel: f64) -> f64 {
    g.value(theta_rel)
}

/// `dS/dθ` evaluated at a phase relative to the gate frame.
pub fn gate_derivative(g: &GateParams, theta_rel: f64) -> f64 {
    g.derivative(theta_rel)
}

/// Expresses `theta_i` relative to the gate frame at time `t` for the
/// population state `phases`.
///
/// For the mean-phase frame a vanishing order parameter (`R < 1e-12`) leaves
/// the mean phase undefined; it is taken to be zero.
pub fn resolve_gate_argument(g: &GateParams, theta_i: f64, t: f64, phases: &[f64]) -> Phase {
    Phase::new(theta_i - frame_reference(g, t, phases))
}

/// The reference phase `ψ` subtracted from each oscillator phase.
pub(crate) fn frame_reference(g: &GateParams, t: f64, phases: &[f64]) -> f64 {
    match g.frame {
        GateFrame::Fixed => 0.0,
        GateFrame::LinearReference { omega_ref, psi0 } => omega_ref * t + psi0.value(),
        GateFrame::MeanPhase => order_parameter(phases).psi.value(),
    }
}

#[inline]
pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `1 − σ(a)σ(b)`, accurate when the product is close to one.
#[inline]
fn one_minus_product(a: f64, b: f64) -> f64 {
    if a >= 0.0 && b >= 0.0 {
        let (ea, eb) = ((-a).exp(), (-b).exp());
        (ea + eb + ea * eb) / ((1.0 + ea) * (1.0 + eb))
    } else {
        1.0 - logistic(a) * logistic(b)
    }
}
