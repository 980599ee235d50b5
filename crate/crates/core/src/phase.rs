//! Points on the circle and wrapped angular arithmetic.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

/// A phase on the circle, stored as its canonical representative in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(from = "f64", into = "f64")]
pub struct Phase(f64);

impl Phase {
    pub const ZERO: Phase = Phase(0.0);

    pub fn new(radians: f64) -> Self {
        Phase(canonicalize(radians))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<f64> for Phase {
    fn from(x: f64) -> Self {
        Phase::new(x)
    }
}

impl From<Phase> for f64 {
    fn from(p: Phase) -> Self {
        p.0
    }
}

/// Maps any real angle to `[0, 2π)`.
#[inline]
pub fn canonicalize(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly 2π
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Shortest signed displacement from `theta0` to `theta`, in `(-π, π]`.
///
/// Antisymmetric except at the antipodal boundary, where both orders give `+π`.
#[inline]
pub fn wrapped_distance(theta: f64, theta0: f64) -> f64 {
    let delta = theta - theta0;
    let d = delta.sin().atan2(delta.cos());
    if d <= -PI {
        PI
    } else {
        d
    }
}

/// Unsigned circular distance `|d(a, b)|` in `[0, π]`.
#[inline]
pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrapped_distance(a, b).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn distance_examples() {
        let t0 = 0.7;
        assert_eq!(wrapped_distance(t0, t0), 0.0);
        assert!((wrapped_distance(t0 + PI / 2.0, t0) - PI / 2.0).abs() < 1e-15);
        assert!((wrapped_distance(t0 - PI / 2.0, t0) + PI / 2.0).abs() < 1e-15);
        assert!((wrapped_distance(t0 + 1.5 * PI, t0) + PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn antipode_maps_to_plus_pi() {
        assert_eq!(wrapped_distance(PI, 0.0), PI);
        assert_eq!(wrapped_distance(0.0, PI), PI);
        assert_eq!(wrapped_distance(-PI, 0.0), PI);
    }

    #[test]
    fn canonical_range() {
        assert_eq!(canonicalize(-1e-18), 0.0);
        assert!((canonicalize(-0.5) - (TAU - 0.5)).abs() < 1e-15);
        assert!((canonicalize(3.0 * TAU + 1.0) - 1.0).abs() < 1e-12);
        assert_eq!(Phase::new(TAU).value(), 0.0);
    }

    proptest! {
        #[test]
        fn distance_in_half_open_range(a in -50.0f64..50.0, b in -50.0f64..50.0) {
            let d = wrapped_distance(a, b);
            prop_assert!(d > -PI && d <= PI);
        }

        #[test]
        fn distance_antisymmetric(a in -50.0f64..50.0, b in -50.0f64..50.0) {
            let d = wrapped_distance(a, b);
            prop_assume!((d.abs() - PI).abs() > 1e-9);
            prop_assert!((d + wrapped_distance(b, a)).abs() < 1e-12);
        }

        #[test]
        fn canonical_is_congruent(x in -1e3f64..1e3) {
            let c = canonicalize(x);
            prop_assert!((0.0..TAU).contains(&c));
            prop_assert!(wrapped_distance(c, x).abs() < 1e-9);
        }
    }
}
