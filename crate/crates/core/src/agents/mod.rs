//! Value-based agents whose behaviour policy is either ε-greedy, the ring
//! attractor (with or without uncertainty-shaped inputs), or the argmax of a
//! circular recurrent layer.

mod agent;
pub mod features;
pub mod network;
mod replay;

use serde::{Deserialize, Serialize};

pub use agent::Agent;
pub use features::{FeatureExtractor, FeatureKind};
pub use network::QNetwork;
pub use replay::ReplayBuffer;

use crate::error::{Error, Result};
use crate::ring_rnn::HiddenState;

/// The experimental arms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    /// ε-greedy over the linear head.
    Baseline,
    /// Ring attractor over constant-width inputs.
    Ring,
    /// Ring attractor fed Thompson-sampled means and spreads.
    RingUA,
    /// `Ring` with actions scattered randomly around the ring.
    RingRandomMap,
    /// Circular recurrent head.
    RnnRing,
    /// Recurrent head with the circular kernels removed.
    RnnNoKernel,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Baseline,
        Variant::Ring,
        Variant::RingUA,
        Variant::RingRandomMap,
        Variant::RnnRing,
        Variant::RnnNoKernel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Baseline => "Baseline",
            Variant::Ring => "Ring",
            Variant::RingUA => "RingUA",
            Variant::RingRandomMap => "RingRandomMap",
            Variant::RnnRing => "RnnRing",
            Variant::RnnNoKernel => "RnnNoKernel",
        }
    }

    pub fn uses_ring_attractor(self) -> bool {
        matches!(self, Variant::Ring | Variant::RingUA | Variant::RingRandomMap)
    }

    pub fn is_recurrent(self) -> bool {
        matches!(self, Variant::RnnRing | Variant::RnnNoKernel)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown variant {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub variant: Variant,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay_steps: usize,
    pub replay_capacity: usize,
    pub batch_size: usize,
    /// `None` picks 1e-2 for tabular and 1e-3 for perceptron features.
    pub learning_rate: Option<f64>,
    pub target_sync_interval: usize,
    pub blr_update_interval: usize,
    pub thompson_i: usize,
    pub prior_variance: f64,
    pub noise_variance: f64,
    pub features: FeatureKind,
    pub hidden_width: usize,
    /// Apply the ε schedule to the recurrent variants too; they act greedily otherwise.
    pub recurrent_epsilon: bool,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Ring,
            gamma: 0.99,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_steps: 5_000,
            replay_capacity: 10_000,
            batch_size: 32,
            learning_rate: None,
            target_sync_interval: 500,
            blr_update_interval: 1_000,
            thompson_i: 30,
            prior_variance: 1.0,
            noise_variance: 1.0,
            features: FeatureKind::Tabular,
            hidden_width: 64,
            recurrent_epsilon: false,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("agent: {msg}")));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad(format!("gamma must lie in [0, 1], got {}", self.gamma));
        }
        for (name, v) in [("epsilon_start", self.epsilon_start), ("epsilon_end", self.epsilon_end)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1]"));
            }
        }
        for (name, v) in [
            ("replay_capacity", self.replay_capacity),
            ("batch_size", self.batch_size),
            ("target_sync_interval", self.target_sync_interval),
            ("blr_update_interval", self.blr_update_interval),
            ("hidden_width", self.hidden_width),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.thompson_i < 2 {
            return bad("thompson_i must be at least 2".into());
        }
        if let Some(lr) = self.learning_rate {
            if !(lr.is_finite() && lr > 0.0) {
                return bad(format!("learning_rate must be positive, got {lr}"));
            }
        }
        for (name, v) in [("prior_variance", self.prior_variance), ("noise_variance", self.noise_variance)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive"));
            }
        }
        Ok(())
    }

    pub fn effective_learning_rate(&self) -> f64 {
        self.learning_rate.unwrap_or(match self.features {
            FeatureKind::Tabular => 1e-2,
            FeatureKind::Perceptron => 1e-3,
        })
    }

    /// Linearly annealed exploration rate after `steps` environment steps.
    pub fn epsilon(&self, steps: usize) -> f64 {
        if self.epsilon_decay_steps == 0 || steps >= self.epsilon_decay_steps {
            return self.epsilon_end;
        }
        let frac = steps as f64 / self.epsilon_decay_steps as f64;
        self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)
    }
}

/// One environment interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s: Vec<f64>,
    pub a: usize,
    pub r: f64,
    pub s_next: Vec<f64>,
    pub done: bool,
    /// Recurrent state the action was chosen under.
    pub h_prev: Option<HiddenState>,
}

/// Bootstrapped regression target: `r` at terminal transitions, otherwise
/// `r + γ · max_a Q_target(s', a)`.
pub fn td_target(reward: f64, done: bool, target_q_next: &[f64], gamma: f64) -> f64 {
    if done || gamma == 0.0 {
        return reward;
    }
    reward + gamma * target_q_next.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
