//! Exogenous ring attractor used as a behaviour policy.
//!
//! Excitatory neurons sit uniformly on a circle and excite each other with a
//! Gaussian fall-off in circular index distance. A single inhibitory neuron,
//! one unit away from every excitatory neuron, pools their activity and feeds
//! it back negatively. Action values enter as Gaussian bumps of input centred
//! on each action's angle; after the dynamics settle, the position of the
//! winning neuron is mapped back to an action.

mod dynamics;
mod input;
mod kernels;
mod topology;

use serde::{Deserialize, Serialize};

use crate::envs::ActionMapping;
use crate::error::{Error, Result};

pub use dynamics::{decode_action, settle, step_dynamics, RingState, Settled};
pub use input::{encode_actions, gaussian_input, InputSignal};
pub use kernels::{build_kernels, RingKernels};
pub use topology::{angular_difference, circular_distance, preferred_angle, rotate};

/// Magnitude below which kernel weights and activities are stored as exact
/// zeros. Nothing this small can move a decision, and products of such values
/// drop into subnormal range where floating-point arithmetic is very slow.
pub const NEGLIGIBLE: f64 = 1e-150;

/// Smallest Gaussian width accepted on the ring, in radians.
pub const SIGMA_MIN: f64 = 0.05;

/// Amplitude given to the lowest-valued action after shifting Q-values.
pub const AMPLITUDE_FLOOR: f64 = 0.1;

/// Input width used when action-value uncertainty is not modelled.
pub const CONSTANT_ACTION_SIGMA: f64 = std::f64::consts::FRAC_PI_6;

/// Topology, kernel scales and integration settings of a ring attractor.
///
/// The inhibitory gains are magnitudes; the sign is applied when the kernels
/// are built. Defaults were tuned so that a 64-neuron ring forms a single
/// narrow bump and settles for every 8-action input tried.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RingConfig {
    pub n_excitatory: usize,
    pub tau: f64,
    pub dt_ratio: f64,
    pub threshold_h: f64,
    pub excitatory_kernel_width: f64,
    pub inhibitory_gain: f64,
    pub inhibitory_self_gain: f64,
    pub excitatory_to_inhibitory_gain: f64,
    pub settle_tolerance: f64,
    pub settle_max_steps: usize,
}

impl Default for RingConfig {
    fn default() -> Self {
        Self {
            n_excitatory: 64,
            tau: 1.0,
            dt_ratio: 0.1,
            threshold_h: 0.0,
            excitatory_kernel_width: 1.0,
            inhibitory_gain: 6.0,
            inhibitory_self_gain: 0.5,
            excitatory_to_inhibitory_gain: 1.0,
            settle_tolerance: 1e-7,
            settle_max_steps: 20_000,
        }
    }
}

impl RingConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("ring: {msg}")));
        if self.n_excitatory < 2 {
            return bad("n_excitatory must be at least 2");
        }
        let positive = [
            ("tau", self.tau),
            ("excitatory_kernel_width", self.excitatory_kernel_width),
            ("inhibitory_gain", self.inhibitory_gain),
            ("inhibitory_self_gain", self.inhibitory_self_gain),
            ("excitatory_to_inhibitory_gain", self.excitatory_to_inhibitory_gain),
            ("settle_tolerance", self.settle_tolerance),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return bad(&format!("{name} must be finite and > 0, got {value}"));
            }
        }
        if !(self.dt_ratio > 0.0 && self.dt_ratio <= 1.0) {
            return bad(&format!("dt_ratio must lie in (0, 1], got {}", self.dt_ratio));
        }
        if !self.threshold_h.is_finite() {
            return bad("threshold_h must be finite");
        }
        if self.settle_max_steps == 0 {
            return bad("settle_max_steps must be positive");
        }
        Ok(())
    }
}

/// Outcome of one pass through the attractor.
#[derive(Debug, Clone)]
pub struct RingDecision {
    pub action: usize,
    pub settled: Settled,
}

/// A validated ring with its kernels precomputed.
#[derive(Debug, Clone)]
pub struct RingAttractor {
    config: RingConfig,
    kernels: RingKernels,
}

impl RingAttractor {
    pub fn new(config: RingConfig) -> Result<Self> {
        let kernels = build_kernels(&config)?;
        Ok(Self { config, kernels })
    }

    pub fn config(&self) -> &RingConfig {
        &self.config
    }

    pub fn kernels(&self) -> &RingKernels {
        &self.kernels
    }

    /// Settle the ring from rest under `input`.
    pub fn settle_input(&self, input: &[f64]) -> Result<Settled> {
        let rest = RingState::zeros(self.config.n_excitatory);
        settle(&rest, input, &self.kernels, &self.config)
    }

    /// Encode action values, settle, and decode the winning action.
    ///
    /// The decoded ring slot is translated back through the mapping, so a
    /// permuted mapping returns the action that was placed at that slot.
    pub fn select(
        &self,
        q_values: &[f64],
        sigmas: &[f64],
        mapping: &ActionMapping,
    ) -> Result<RingDecision> {
        let signals = encode_actions(q_values, sigmas, mapping)?;
        let input = gaussian_input(&signals, &self.config)?;
        let settled = self.settle_input(&input)?;
        let slot = decode_action(&settled.state, mapping.n_actions())?;
        Ok(RingDecision {
            action: mapping.action_at_slot(slot),
            settled,
        })
    }
}
