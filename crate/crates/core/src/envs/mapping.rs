use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Placement of discrete actions on the ring.
///
/// Action `a` sits at ring slot `permutation[a]`, whose angle is
/// `angles[permutation[a]]`. The default is the identity placement with
/// uniformly spaced angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct ActionMapping {
    n_actions: usize,
    angles: Vec<f64>,
    permutation: Vec<usize>,
    inverse: Vec<usize>,
}

impl TryFrom<Vec<usize>> for ActionMapping {
    type Error = crate::error::Error;

    fn try_from(permutation: Vec<usize>) -> Result<Self> {
        Self::with_permutation(permutation)
    }
}

impl From<ActionMapping> for Vec<usize> {
    fn from(mapping: ActionMapping) -> Self {
        mapping.permutation
    }
}

impl ActionMapping {
    pub fn uniform(n_actions: usize) -> Self {
        Self::with_permutation((0..n_actions).collect()).expect("identity is a bijection")
    }

    pub fn with_permutation(permutation: Vec<usize>) -> Result<Self> {
        let n = permutation.len();
        if n == 0 {
            return Err(invalid("an action mapping needs at least one action"));
        }
        let mut inverse = vec![usize::MAX; n];
        for (a, &slot) in permutation.iter().enumerate() {
            if slot >= n || inverse[slot] != usize::MAX {
                return Err(invalid(format!("{permutation:?} is not a permutation")));
            }
            inverse[slot] = a;
        }
        Ok(Self {
            n_actions: n,
            angles: (0..n).map(|j| TAU * j as f64 / n as f64).collect(),
            permutation,
            inverse,
        })
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn is_identity(&self) -> bool {
        self.permutation.iter().enumerate().all(|(a, &s)| a == s)
    }

    /// Angle of action `a` on the ring.
    pub fn angle(&self, a: usize) -> Result<f64> {
        self.permutation
            .get(a)
            .map(|&slot| self.angles[slot])
            .ok_or_else(|| invalid(format!("action {a} out of range for {} actions", self.n_actions)))
    }

    /// Action placed at ring slot `slot`.
    pub fn action_at_slot(&self, slot: usize) -> usize {
        self.inverse[slot]
    }

    /// Copy with a uniformly random placement (Fisher-Yates shuffle).
    pub fn permute<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        let mut permutation: Vec<usize> = (0..self.n_actions).collect();
        permutation.shuffle(rng);
        Self::with_permutation(permutation).expect("a shuffle is a bijection")
    }
}
