use super::{classical_locked_state, solve_locked, LockedProfile, SolverOptions};
use crate::error::{Error, Result};
use crate::gate::GateParams;
use crate::model::ModelConfig;

/// Largest width increment between consecutive solves.
pub const WIDTH_STEP: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct ContinuationPoint {
    pub w: f64,
    pub profile: Result<LockedProfile>,
}

/// Follows the locked branch from the ungated system through increasing
/// dead-zone widths.
///
/// The chain starts at the classical locked state (gate disabled) and then
/// walks `w` upward from [`WIDTH_STEP`] in increments of at most
/// [`WIDTH_STEP`], reusing each converged profile as the next guess. One point
/// is reported per requested width, in ascending order. Once the branch is
/// lost every later width reports the failure.
pub fn continue_in_width(cfg: &ModelConfig, widths: &[f64], opts: &SolverOptions) -> Result<Vec<ContinuationPoint>> {
    let mut targets: Vec<f64> = widths.to_vec();
    if targets.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidConfig("continuation widths must be positive".into()));
    }
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let classical = ModelConfig { gate: GateParams::disabled(), ..cfg.clone() };
    let (mut guess, mut omega) = match classical_locked_state(&cfg.omega, cfg.coupling) {
        Some(g) => g,
        None => (vec![0.0; cfg.n()], cfg.mean_frequency()),
    };
    let start = solve_locked(&classical, (&guess, omega), opts)?;
    if start.converged {
        guess = start.vartheta;
        omega = start.omega;
    }

    let mut out = Vec::with_capacity(targets.len());
    let mut w = 0.0;
    let mut lost: Option<String> = None;
    for &target in &targets {
        if let Some(msg) = &lost {
            out.push(ContinuationPoint { w: target, profile: Err(Error::PreconditionViolated(msg.clone())) });
            continue;
        }
        let steps = ((target - w) / WIDTH_STEP).ceil().max(1.0) as usize;
        let from = w;
        let mut last = None;
        for s in 1..=steps {
            let ws = if s == steps { target } else { from + (target - from) * s as f64 / steps as f64 };
            let model = ModelConfig { gate: GateParams { w: ws, enabled: true, ..cfg.gate }, ..cfg.clone() };
            match solve_locked(&model, (&guess, omega), opts) {
                Ok(p) if p.converged => {
                    guess.clone_from(&p.vartheta);
                    omega = p.omega;
                    last = Some(Ok(p));
                }
                Ok(p) if s == steps => last = Some(Ok(p)),
                Ok(p) => {
                    lost = Some(format!("branch lost at w = {ws}"));
                    last = Some(Ok(p));
                    break;
                }
                Err(e) => {
                    lost = Some(format!("branch lost at w = {ws}: {e}"));
                    last = Some(Err(e));
                    break;
                }
            }
        }
        if let Some(Ok(p)) = &last {
            if !p.converged && lost.is_none() {
                lost = Some(format!("branch lost at w = {target}"));
            }
        }
        w = target;
        out.push(ContinuationPoint { w: target, profile: last.expect("at least one step") });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locked::locked_frequency_identity;
    use crate::model::FrequencySpec;

    #[test]
    fn strong_coupling_branch_survives_narrow_widths() {
        let gate = GateParams::new(0.0, 1.0, 10.0);
        let cfg = ModelConfig::from_spec(20, 0.2, &FrequencySpec::PeriodRange([23.0, 25.0]), gate).unwrap();
        let pts = continue_in_width(&cfg, &[0.5, 0.1, 1.0], &SolverOptions::default()).unwrap();
        assert_eq!(pts.iter().map(|p| p.w).collect::<Vec<_>>(), vec![0.1, 0.5, 1.0]);
        for pt in &pts {
            let p = pt.profile.as_ref().unwrap();
            assert!(p.converged, "w = {}", pt.w);
            let model = ModelConfig { gate: GateParams { w: pt.w, ..cfg.gate }, ..cfg.clone() };
            let (om, _) = locked_frequency_identity(&model, &p.vartheta);
            assert!((om - p.omega).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_non_positive_width() {
        let cfg = ModelConfig::new(0.2, vec![0.0; 3], GateParams::new(0.0, 1.0, 10.0)).unwrap();
        assert!(continue_in_width(&cfg, &[0.0], &SolverOptions::default()).is_err());
    }
}
