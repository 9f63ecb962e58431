//! Recurrent layer whose input and recurrent weights are shaped by circular
//! distance.
//!
//! Each of the `N` hidden units stands for one action on a ring. A learnable
//! base matrix is multiplied elementwise by a fixed-form kernel
//! `exp(-d(m, n) / λ)`, where `d` is the circular distance between units
//! (input units are projected onto ring coordinates first). With the ring
//! disabled the kernels are all ones and the layer is a plain tanh RNN.
//!
//! ```text
//! h_t = tanh( (1/τ) φᵀ (B_ih ⊙ K_ih) + h_{t-1}ᵀ (B_hh ⊙ K_hh) )
//! q   = β · h_t
//! ```
//!
//! `λ` and `τ` are stored as logarithms so gradient steps keep them positive.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Result};

// λ and τ live in log space; clamping keeps exp() away from 0 and ∞.
const LOG_BOUND: f64 = 30.0;

/// Initial values of the learnable scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RnnConfig {
    pub lambda_init: f64,
    pub tau_init: f64,
    pub beta_init: f64,
}

impl Default for RnnConfig {
    fn default() -> Self {
        Self {
            lambda_init: 2.0,
            tau_init: 1.0,
            beta_init: 1.0,
        }
    }
}

impl RnnConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda_init", self.lambda_init), ("tau_init", self.tau_init)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(crate::error::Error::Config(format!(
                    "rnn: {name} must be positive, got {v}"
                )));
            }
        }
        if !self.beta_init.is_finite() {
            return Err(crate::error::Error::Config("rnn: beta_init must be finite".into()));
        }
        Ok(())
    }
}

/// Which of the two circular kernels to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    InputToHidden,
    HiddenToHidden,
}

/// Carried recurrent state, one entry per ring unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenState {
    pub h: Vec<f64>,
}

impl HiddenState {
    pub fn zeros(n: usize) -> Self {
        Self { h: vec![0.0; n] }
    }
}

/// Serialised form of a layer (row-major matrices, log-space positives).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub m_in: usize,
    pub n_hidden: usize,
    pub base_ih: Vec<f64>,
    pub base_hh: Vec<f64>,
    pub log_lambda: f64,
    pub log_tau: f64,
    pub beta: f64,
    pub ring_enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LayerParams", into = "LayerParams")]
pub struct RingRnnLayer {
    params: LayerParams,
    kernel_ih: Vec<f64>,
    kernel_hh: Vec<f64>,
}

impl TryFrom<LayerParams> for RingRnnLayer {
    type Error = crate::error::Error;

    fn try_from(params: LayerParams) -> Result<Self> {
        let (m, n) = (params.m_in, params.n_hidden);
        if m == 0 || n == 0 || params.base_ih.len() != m * n || params.base_hh.len() != n * n {
            return Err(invalid("layer parameters have inconsistent shapes"));
        }
        let mut layer = Self {
            params,
            kernel_ih: Vec::new(),
            kernel_hh: Vec::new(),
        };
        layer.refresh_kernels();
        Ok(layer)
    }
}

impl From<RingRnnLayer> for LayerParams {
    fn from(layer: RingRnnLayer) -> Self {
        layer.params
    }
}

/// Gradients of `Σ_n upstream_n · q_n` with respect to every input of the layer.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnGrads {
    pub base_ih: Vec<f64>,
    pub base_hh: Vec<f64>,
    pub lambda: f64,
    pub tau: f64,
    pub beta: f64,
    pub phi: Vec<f64>,
}

impl RnnGrads {
    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            base_ih: vec![0.0; m * n],
            base_hh: vec![0.0; n * n],
            lambda: 0.0,
            tau: 0.0,
            beta: 0.0,
            phi: vec![0.0; m],
        }
    }

    /// `self += scale · other`, used to accumulate over a batch.
    pub fn add_scaled(&mut self, other: &RnnGrads, scale: f64) {
        for (a, b) in self.base_ih.iter_mut().zip(&other.base_ih) {
            *a += scale * b;
        }
        for (a, b) in self.base_hh.iter_mut().zip(&other.base_hh) {
            *a += scale * b;
        }
        self.lambda += scale * other.lambda;
        self.tau += scale * other.tau;
        self.beta += scale * other.beta;
        for (a, b) in self.phi.iter_mut().zip(&other.phi) {
            *a += scale * b;
        }
    }
}

/// Intermediate values of a forward pass needed by [`RingRnnLayer::backward`].
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    pub q: Vec<f64>,
    pub h: HiddenState,
    /// `φᵀ W_ih` before the `1/τ` scaling.
    input_drive: Vec<f64>,
}

/// Distance used by the input kernel: input unit `m` against ring unit `n`
/// projected to input coordinates `n·M/N`, wrapped over `M`.
fn input_distance(m: usize, n: usize, m_in: usize, n_hidden: usize) -> f64 {
    let projected = n as f64 * m_in as f64 / n_hidden as f64;
    let d = (m as f64 - projected).abs();
    d.min(m_in as f64 - d)
}

fn hidden_distance(m: usize, n: usize, n_hidden: usize) -> f64 {
    let d = m.abs_diff(n);
    d.min(n_hidden - d) as f64
}

impl RingRnnLayer {
    /// Fresh layer: base weights uniform in `±1/sqrt(fan_in)`, `λ = 2`,
    /// `τ = 1`, `β = 1`.
    pub fn new<R: Rng + ?Sized>(m_in: usize, n_hidden: usize, ring_enabled: bool, rng: &mut R) -> Result<Self> {
        if m_in == 0 || n_hidden == 0 {
            return Err(invalid("layer sizes must be positive"));
        }
        let bound_ih = 1.0 / (m_in as f64).sqrt();
        let bound_hh = 1.0 / (n_hidden as f64).sqrt();
        let base_ih = (0..m_in * n_hidden)
            .map(|_| rng.random_range(-bound_ih..bound_ih))
            .collect();
        let base_hh = (0..n_hidden * n_hidden)
            .map(|_| rng.random_range(-bound_hh..bound_hh))
            .collect();
        LayerParams {
            m_in,
            n_hidden,
            base_ih,
            base_hh,
            log_lambda: 2.0f64.ln(),
            log_tau: 0.0,
            beta: 1.0,
            ring_enabled,
        }
        .try_into()
    }

    /// Fresh layer with the scalars taken from `config`.
    pub fn from_config<R: Rng + ?Sized>(
        m_in: usize,
        n_hidden: usize,
        ring_enabled: bool,
        config: &RnnConfig,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        let mut layer = Self::new(m_in, n_hidden, ring_enabled, rng)?;
        layer.set_lambda(config.lambda_init)?;
        layer.set_tau(config.tau_init)?;
        layer.set_beta(config.beta_init);
        Ok(layer)
    }

    pub fn params(&self) -> &LayerParams {
        &self.params
    }

    pub fn m_in(&self) -> usize {
        self.params.m_in
    }

    pub fn n_hidden(&self) -> usize {
        self.params.n_hidden
    }

    pub fn lambda(&self) -> f64 {
        self.params.log_lambda.exp()
    }

    pub fn tau(&self) -> f64 {
        self.params.log_tau.exp()
    }

    pub fn beta(&self) -> f64 {
        self.params.beta
    }

    pub fn ring_enabled(&self) -> bool {
        self.params.ring_enabled
    }

    pub fn set_lambda(&mut self, lambda: f64) -> Result<()> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(invalid(format!("lambda must be positive, got {lambda}")));
        }
        self.params.log_lambda = lambda.ln();
        self.refresh_kernels();
        Ok(())
    }

    pub fn set_tau(&mut self, tau: f64) -> Result<()> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(invalid(format!("tau must be positive, got {tau}")));
        }
        self.params.log_tau = tau.ln();
        Ok(())
    }

    pub fn set_beta(&mut self, beta: f64) {
        self.params.beta = beta;
    }

    pub fn base_ih_mut(&mut self) -> &mut [f64] {
        &mut self.params.base_ih
    }

    pub fn base_hh_mut(&mut self) -> &mut [f64] {
        &mut self.params.base_hh
    }

    fn refresh_kernels(&mut self) {
        self.kernel_ih = self.build_circular_kernel(KernelKind::InputToHidden);
        self.kernel_hh = self.build_circular_kernel(KernelKind::HiddenToHidden);
    }

    /// Row-major kernel; `kernel[m * N + n]` couples source `m` to ring unit `n`.
    pub fn build_circular_kernel(&self, kind: KernelKind) -> Vec<f64> {
        let (m_in, n) = (self.params.m_in, self.params.n_hidden);
        let rows = match kind {
            KernelKind::InputToHidden => m_in,
            KernelKind::HiddenToHidden => n,
        };
        if !self.params.ring_enabled {
            return vec![1.0; rows * n];
        }
        let lambda = self.lambda();
        let mut kernel = Vec::with_capacity(rows * n);
        for m in 0..rows {
            for k in 0..n {
                let d = match kind {
                    KernelKind::InputToHidden => input_distance(m, k, m_in, n),
                    KernelKind::HiddenToHidden => hidden_distance(m, k, n),
                };
                kernel.push((-d / lambda).exp());
            }
        }
        kernel
    }

    fn distance(&self, kind: KernelKind, m: usize, k: usize) -> f64 {
        match kind {
            KernelKind::InputToHidden => input_distance(m, k, self.params.m_in, self.params.n_hidden),
            KernelKind::HiddenToHidden => hidden_distance(m, k, self.params.n_hidden),
        }
    }

    fn check_inputs(&self, phi: &[f64], h_prev: &HiddenState) -> Result<()> {
        if phi.len() != self.params.m_in || h_prev.h.len() != self.params.n_hidden {
            return Err(invalid(format!(
                "expected phi of {} and hidden of {}, got {} and {}",
                self.params.m_in,
                self.params.n_hidden,
                phi.len(),
                h_prev.h.len()
            )));
        }
        ensure_finite(phi, "phi")?;
        ensure_finite(&h_prev.h, "h_prev")
    }

    /// Forward pass keeping what the backward pass needs.
    pub fn forward_cached(&self, phi: &[f64], h_prev: &HiddenState) -> Result<ForwardCache> {
        self.check_inputs(phi, h_prev)?;
        let n = self.params.n_hidden;
        let inv_tau = 1.0 / self.tau();
        let mut input_drive = vec![0.0; n];
        for (m, &p) in phi.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let row = m * n;
            for k in 0..n {
                input_drive[k] += p * self.params.base_ih[row + k] * self.kernel_ih[row + k];
            }
        }
        let mut pre: Vec<f64> = input_drive.iter().map(|a| a * inv_tau).collect();
        for (j, &hj) in h_prev.h.iter().enumerate() {
            let row = j * n;
            for k in 0..n {
                pre[k] += hj * self.params.base_hh[row + k] * self.kernel_hh[row + k];
            }
        }
        let h: Vec<f64> = pre.iter().map(|x| x.tanh()).collect();
        let q = h.iter().map(|x| self.params.beta * x).collect();
        Ok(ForwardCache {
            q,
            h: HiddenState { h },
            input_drive,
        })
    }

    /// Write a JSON checkpoint of the parameters.
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(&self.params)?)?;
        Ok(())
    }

    /// Read a checkpoint written by [`RingRnnLayer::save`], rebuilding the kernels.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let params: LayerParams = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        params.try_into()
    }

    /// Action values and the next hidden state.
    pub fn forward(&self, phi: &[f64], h_prev: &HiddenState) -> Result<(Vec<f64>, HiddenState)> {
        let cache = self.forward_cached(phi, h_prev)?;
        Ok((cache.q, cache.h))
    }

    /// Exact gradients of `upstreamᵀ q`, treating `h_prev` as a constant.
    pub fn backward(
        &self,
        phi: &[f64],
        h_prev: &HiddenState,
        cache: &ForwardCache,
        upstream: &[f64],
    ) -> Result<RnnGrads> {
        self.check_inputs(phi, h_prev)?;
        let (m_in, n) = (self.params.m_in, self.params.n_hidden);
        if upstream.len() != n || cache.q.len() != n {
            return Err(invalid("upstream gradient length does not match the layer"));
        }
        let beta = self.params.beta;
        let tau = self.tau();
        let inv_tau = 1.0 / tau;
        let lambda = self.lambda();
        let h = &cache.h.h;

        let mut grads = RnnGrads::zeros(m_in, n);
        grads.beta = upstream.iter().zip(h).map(|(g, h)| g * h).sum();
        let d_pre: Vec<f64> = upstream
            .iter()
            .zip(h)
            .map(|(g, h)| g * beta * (1.0 - h * h))
            .collect();
        grads.tau = -d_pre
            .iter()
            .zip(&cache.input_drive)
            .map(|(d, a)| d * a)
            .sum::<f64>()
            * inv_tau
            * inv_tau;

        let mut d_lambda = 0.0;
        for m in 0..m_in {
            let row = m * n;
            let mut d_phi = 0.0;
            for k in 0..n {
                let idx = row + k;
                let kernel = self.kernel_ih[idx];
                let base = self.params.base_ih[idx];
                let d_weight = d_pre[k] * phi[m] * inv_tau;
                grads.base_ih[idx] = d_weight * kernel;
                d_phi += d_pre[k] * base * kernel * inv_tau;
                if self.params.ring_enabled {
                    let d = self.distance(KernelKind::InputToHidden, m, k);
                    d_lambda += d_weight * base * kernel * d / (lambda * lambda);
                }
            }
            grads.phi[m] = d_phi;
        }
        for j in 0..n {
            let row = j * n;
            for k in 0..n {
                let idx = row + k;
                let kernel = self.kernel_hh[idx];
                let base = self.params.base_hh[idx];
                let d_weight = d_pre[k] * h_prev.h[j];
                grads.base_hh[idx] = d_weight * kernel;
                if self.params.ring_enabled {
                    let d = self.distance(KernelKind::HiddenToHidden, j, k);
                    d_lambda += d_weight * base * kernel * d / (lambda * lambda);
                }
            }
        }
        grads.lambda = d_lambda;
        Ok(grads)
    }

    /// Plain gradient-descent step; `λ` and `τ` move in log space.
    pub fn apply_gradients(&mut self, grads: &RnnGrads, learning_rate: f64) {
        for (w, g) in self.params.base_ih.iter_mut().zip(&grads.base_ih) {
            *w -= learning_rate * g;
        }
        for (w, g) in self.params.base_hh.iter_mut().zip(&grads.base_hh) {
            *w -= learning_rate * g;
        }
        self.params.beta -= learning_rate * grads.beta;
        let tau_step = learning_rate * grads.tau * self.tau();
        self.params.log_tau = (self.params.log_tau - tau_step).clamp(-LOG_BOUND, LOG_BOUND);
        if self.params.ring_enabled {
            let lambda_step = learning_rate * grads.lambda * self.lambda();
            self.params.log_lambda =
                (self.params.log_lambda - lambda_step).clamp(-LOG_BOUND, LOG_BOUND);
            self.refresh_kernels();
        }
    }
}
