//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use ringrl::ring_rnn::{HiddenState, RingRnnLayer};

pub type Matrix = Vec<Vec<f64>>;

/// Conjugate Gaussian posterior built by absorbing observations one at a time
/// with rank-one (Sherman-Morrison) updates, starting from `N(0, σp² I)`.
///
/// Returns `(mean, covariance)` per action.
pub fn sequential_blr(
    dim: usize,
    n_actions: usize,
    prior_variance: f64,
    noise_variance: f64,
    rows: &[(usize, Vec<f64>)],
    targets: &[f64],
) -> Vec<(Vec<f64>, Matrix)> {
    let mut post: Vec<(Vec<f64>, Matrix)> = (0..n_actions)
        .map(|_| {
            let cov = (0..dim)
                .map(|i| (0..dim).map(|j| if i == j { prior_variance } else { 0.0 }).collect())
                .collect();
            (vec![0.0; dim], cov)
        })
        .collect();
    for ((a, x), &y) in rows.iter().zip(targets) {
        let (mean, cov) = &mut post[*a];
        let sx: Vec<f64> = (0..dim).map(|i| (0..dim).map(|j| cov[i][j] * x[j]).sum()).collect();
        let denom = noise_variance + (0..dim).map(|i| x[i] * sx[i]).sum::<f64>();
        let residual = y - (0..dim).map(|i| x[i] * mean[i]).sum::<f64>();
        for i in 0..dim {
            mean[i] += sx[i] * residual / denom;
        }
        for i in 0..dim {
            for j in 0..dim {
                cov[i][j] -= sx[i] * sx[j] / denom;
            }
        }
    }
    post
}

/// Ring slot of an argmax neuron: nearest action position, wrapping around.
pub fn decode_oracle(argmax: usize, n_neurons: usize, n_actions: usize) -> usize {
    let position = argmax as f64 * n_actions as f64 / n_neurons as f64;
    (position.round() as usize) % n_actions
}

pub const FD_EPS: f64 = 1e-5;

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

pub struct RnnInstance {
    pub layer: RingRnnLayer,
    pub phi: Vec<f64>,
    pub h_prev: HiddenState,
    pub upstream: Vec<f64>,
}

/// A random layer with `M, N ≤ 8` and random inputs.
pub fn random_rnn_instance(rng: &mut ChaCha8Rng, ring: bool) -> RnnInstance {
    let m = rng.random_range(1..=8);
    let n = rng.random_range(1..=8);
    let mut layer = RingRnnLayer::new(m, n, ring, rng).unwrap();
    layer.set_lambda(rng.random_range(0.5..4.0)).unwrap();
    layer.set_tau(rng.random_range(0.5..2.0)).unwrap();
    layer.set_beta(rng.random_range(-2.0..2.0));
    let phi = random_vec(rng, m, 1.5);
    let h_prev = HiddenState {
        h: random_vec(rng, n, 1.0),
    };
    let upstream = random_vec(rng, n, 1.0);
    RnnInstance {
        layer,
        phi,
        h_prev,
        upstream,
    }
}

fn objective(layer: &RingRnnLayer, phi: &[f64], h_prev: &HiddenState, up: &[f64]) -> f64 {
    let (q, _) = layer.forward(phi, h_prev).unwrap();
    q.iter().zip(up).map(|(q, u)| q * u).sum()
}

/// Largest relative error between the analytic gradient of `upstream · q`
/// and central differences, over every parameter and every input.
pub fn rnn_gradient_error(inst: &RnnInstance) -> f64 {
    let RnnInstance {
        layer,
        phi,
        h_prev,
        upstream: up,
    } = inst;
    let cache = layer.forward_cached(phi, h_prev).unwrap();
    let g = layer.backward(phi, h_prev, &cache, up).unwrap();
    let f = |l: &RingRnnLayer, p: &[f64]| objective(l, p, h_prev, up);
    let central = |plus: &RingRnnLayer, minus: &RingRnnLayer| (f(plus, phi) - f(minus, phi)) / (2.0 * FD_EPS);
    let mut worst: f64 = 0.0;
    for i in 0..layer.params().base_ih.len() {
        let (mut p, mut m) = (layer.clone(), layer.clone());
        p.base_ih_mut()[i] += FD_EPS;
        m.base_ih_mut()[i] -= FD_EPS;
        worst = worst.max(rel_err(g.base_ih[i], central(&p, &m)));
    }
    for i in 0..layer.params().base_hh.len() {
        let (mut p, mut m) = (layer.clone(), layer.clone());
        p.base_hh_mut()[i] += FD_EPS;
        m.base_hh_mut()[i] -= FD_EPS;
        worst = worst.max(rel_err(g.base_hh[i], central(&p, &m)));
    }
    if layer.ring_enabled() {
        let (mut p, mut m) = (layer.clone(), layer.clone());
        p.set_lambda(layer.lambda() + FD_EPS).unwrap();
        m.set_lambda(layer.lambda() - FD_EPS).unwrap();
        worst = worst.max(rel_err(g.lambda, central(&p, &m)));
    } else if g.lambda != 0.0 {
        return f64::INFINITY;
    }
    let (mut p, mut m) = (layer.clone(), layer.clone());
    p.set_tau(layer.tau() + FD_EPS).unwrap();
    m.set_tau(layer.tau() - FD_EPS).unwrap();
    worst = worst.max(rel_err(g.tau, central(&p, &m)));
    let (mut p, mut m) = (layer.clone(), layer.clone());
    p.set_beta(layer.beta() + FD_EPS);
    m.set_beta(layer.beta() - FD_EPS);
    worst = worst.max(rel_err(g.beta, central(&p, &m)));
    for i in 0..phi.len() {
        let (mut pp, mut pm) = (phi.clone(), phi.clone());
        pp[i] += FD_EPS;
        pm[i] -= FD_EPS;
        let num = (f(layer, &pp) - f(layer, &pm)) / (2.0 * FD_EPS);
        worst = worst.max(rel_err(g.phi[i], num));
    }
    worst
}
