//! Desk-scale environments and the action-to-angle mapping shared with the ring.

mod gridworld;
mod mapping;

pub use gridworld::{Encoding, GridConfig, GridWorld, StepOutcome, COMPASS};
pub use mapping::ActionMapping;

use crate::error::Result;

/// Minimal episodic environment interface used by the harness.
pub trait Environment {
    fn n_actions(&self) -> usize;

    /// Length of the encoded observation vector.
    fn observation_len(&self) -> usize;

    fn reset(&mut self, seed: u64) -> Vec<f64>;

    fn step(&mut self, action: usize) -> Result<StepOutcome>;
}
