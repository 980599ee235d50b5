use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::phase::canonicalize;

/// How initial phases are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    /// `θ_i(0) = 2π·i/N`.
    Equispaced,
    /// Independent uniform draws on `[0, 2π)`. Oscillator `i` reads stream
    /// `i` of a ChaCha generator keyed by `seed`, so each phase depends only
    /// on `(seed, i)`.
    UniformRandom { seed: u64 },
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::UniformRandom { seed: 0 }
    }
}

impl InitSpec {
    pub fn phases(&self, n: usize) -> Vec<f64> {
        match *self {
            InitSpec::Equispaced => (0..n).map(|i| TAU * i as f64 / n as f64).collect(),
            InitSpec::UniformRandom { seed } => (0..n).map(|i| uniform_phase(seed, i as u64)).collect(),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            InitSpec::Equispaced => None,
            InitSpec::UniformRandom { seed } => Some(seed),
        }
    }

    /// Same mode with a different seed; equispaced layouts are unchanged.
    pub fn reseeded(&self, seed: u64) -> Self {
        match self {
            InitSpec::Equispaced => InitSpec::Equispaced,
            InitSpec::UniformRandom { .. } => InitSpec::UniformRandom { seed },
        }
    }
}

fn uniform_phase(seed: u64, index: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    canonicalize(rng.random::<f64>() * TAU)
}
