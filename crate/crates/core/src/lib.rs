//! Receiver-gated Kuramoto oscillators.
//!
//! Each oscillator's response to the population is multiplied by a smooth
//! dead-zone gate evaluated at its own phase:
//!
//! ```text
//! dθ_i/dt = ω_i + (K/N)·S(θ_i − ψ)·Σ_j sin(θ_j − θ_i)
//! ```
//!
//! The crate provides the model ([`model`], [`gate`]), adaptive integration
//! with section events ([`integrator`]), trajectory diagnostics
//! ([`analysis`]), phase-locked state computation and stability
//! ([`locked`]), and a deterministic sweep harness ([`harness`]).

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod gate;
pub mod harness;
pub mod integrator;
pub mod locked;
pub mod model;
pub mod order;
pub mod phase;

pub use error::{Error, Result};
pub use gate::{gate_derivative, gate_value, resolve_gate_argument, GateFrame, GateParams};
pub use model::{rhs, rhs_pairwise, FrequencySpec, ModelConfig};
pub use order::{order_parameter, OrderParameter};
pub use phase::{canonicalize, wrapped_distance, Phase};
