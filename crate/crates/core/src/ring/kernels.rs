use serde::{Deserialize, Serialize};

use super::topology::circular_distance_unchecked;
use super::{RingConfig, NEGLIGIBLE};
use crate::error::Result;

/// Synaptic weights of the ring.
///
/// `w_ee` is stored row-major; row `m` holds the weights from neuron `m` to
/// every neuron `n`. Inhibitory weights carry their negative sign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingKernels {
    pub n: usize,
    pub w_ee: Vec<f64>,
    /// Largest circular distance with a nonzero excitatory weight.
    pub reach: usize,
    pub w_ie: Vec<f64>,
    pub w_ei: Vec<f64>,
    pub w_ii: f64,
}

impl RingKernels {
    #[inline]
    pub fn ee(&self, m: usize, n: usize) -> f64 {
        self.w_ee[m * self.n + n]
    }

    #[inline]
    pub fn ee_row(&self, m: usize) -> &[f64] {
        &self.w_ee[m * self.n..(m + 1) * self.n]
    }
}

/// Build the excitatory Gaussian kernel over circular distance and the
/// uniform inhibitory couplings (the inhibitory neuron is one unit from all
/// excitatory neurons, hence the `e^-1` factor).
pub fn build_kernels(config: &RingConfig) -> Result<RingKernels> {
    config.validate()?;
    let n = config.n_excitatory;
    let width = config.excitatory_kernel_width;
    let mut w_ee = vec![0.0; n * n];
    for m in 0..n {
        for k in 0..n {
            let d = circular_distance_unchecked(m, k, n) as f64 / width;
            let w = (-d * d).exp();
            w_ee[m * n + k] = if w < NEGLIGIBLE { 0.0 } else { w };
        }
    }
    let reach = (0..=n / 2).rev().find(|&d| w_ee[d] != 0.0).unwrap_or(0);
    let unit = (-1.0f64).exp();
    Ok(RingKernels {
        n,
        w_ee,
        reach,
        w_ie: vec![-config.inhibitory_gain * unit; n],
        w_ei: vec![config.excitatory_to_inhibitory_gain * unit; n],
        w_ii: -config.inhibitory_self_gain,
    })
}
