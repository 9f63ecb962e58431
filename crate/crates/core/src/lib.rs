//! Ring-attractor action selection for value-based reinforcement learning.
//!
//! The crate couples a continuous-time excitatory/inhibitory ring network
//! with Q-learning agents: action values become Gaussian bumps of input on
//! the ring, the network settles, and the position of the activity bump
//! picks the action. An optional Bayesian output layer shapes the bump
//! widths by posterior uncertainty, and a recurrent alternative builds the
//! same circular structure into a trainable layer.

pub mod agents;
pub mod envs;
mod error;
pub mod harness;
pub mod ring;
pub mod ring_rnn;
pub mod uq;

pub use error::{Error, Result};
