use std::f64::consts::{PI, TAU};

use gated_kuramoto::harness::{
    run_experiment, Axis, Execution, InitSpec, ModelSpec, Pipeline, PointConfig, SweepParam, SweepSpec, POINCARE_T_END,
};
use gated_kuramoto::integrator::IntegrationConfig;
use gated_kuramoto::{order_parameter, rhs, rhs_pairwise, FrequencySpec, GateFrame, GateParams, ModelConfig};
use proptest::prelude::*;

proptest! {
    #[test]
    fn gate_stays_in_unit_interval(theta in -20.0..20.0f64, theta0 in -PI..PI, w in 0.01..TAU, k in 0.0..50.0f64) {
        let g = GateParams::new(theta0, w, k);
        let s = g.value(theta);
        prop_assert!(s > 0.0 && s <= 1.0);
        prop_assert!((g.value(theta + TAU) - s).abs() < 1e-12);
    }

    #[test]
    fn mean_field_rhs_matches_pairwise(
        phases in prop::collection::vec(-10.0..10.0f64, 2..40),
        coupling in 0.0..2.0f64,
        w in 0.1..6.0f64,
    ) {
        let n = phases.len();
        let cfg = ModelConfig::new(coupling, vec![0.26; n], GateParams::new(0.5, w, 10.0)).unwrap();
        let a = rhs(&cfg, 0.0, &phases);
        let b = rhs_pairwise(&cfg, 0.0, &phases);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn order_parameter_is_rotation_invariant(phases in prop::collection::vec(0.0..TAU, 1..30), shift in -PI..PI) {
        let r0 = order_parameter(&phases).r;
        let moved: Vec<f64> = phases.iter().map(|p| p + shift).collect();
        prop_assert!((order_parameter(&moved).r - r0).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-15).contains(&r0));
    }
}

/// A weak-coupling width sweep gives mostly the same verdicts for three
/// replicate seeds; only cells near the transition may differ.
#[test]
fn locking_verdicts_are_seed_independent() {
    let widths: Vec<f64> = (0..=31).map(|i| 0.1 * i as f64).collect();
    let spec = SweepSpec {
        base: PointConfig {
            model: ModelSpec { n: 20, coupling: 0.02, omega: FrequencySpec::PeriodRange([23.0, 25.0]) },
            gate: GateParams::new(0.0, PI, 10.0).with_frame(GateFrame::MeanPhase),
            init: InitSpec::UniformRandom { seed: 0 },
            integration: IntegrationConfig::new(0.0, POINCARE_T_END).with_sample_dt(10.0),
            pipeline: Pipeline::poincare(),
        },
        axes: vec![Axis::new(SweepParam::W, widths.clone())],
        replicate_seeds: vec![11, 12, 13],
    };
    let rows = run_experiment(&spec, Execution::Parallel).unwrap().rows;
    let unanimous = rows
        .chunks(3)
        .filter(|c| c.iter().all(|r| r.outcome.verdict == c[0].outcome.verdict))
        .count();
    assert!(unanimous as f64 >= 0.8 * widths.len() as f64, "{unanimous} of {} cells unanimous", widths.len());
}
