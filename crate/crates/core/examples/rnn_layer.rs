//! Forward and backward passes through the ring-structured recurrent layer.
//!
//! Prints the distance-decaying hidden-to-hidden kernel, runs a few recurrent
//! steps, and compares the analytic gradients of λ, τ and β with central
//! differences.
//!
//! Run with `cargo run --example rnn_layer`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ringrl::ring_rnn::{HiddenState, KernelKind, RingRnnLayer};

fn loss(layer: &RingRnnLayer, phi: &[f64], h: &HiddenState) -> f64 {
    layer.forward(phi, h).unwrap().0.iter().sum()
}

fn main() -> ringrl::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (m, n) = (4, 6);
    let mut layer = RingRnnLayer::new(m, n, true, &mut rng)?;
    layer.set_lambda(1.5)?;
    layer.set_tau(0.8)?;

    println!("hidden-to-hidden kernel (row 0): {:.3?}", &layer.build_circular_kernel(KernelKind::HiddenToHidden)[..n]);

    let mut h = HiddenState::zeros(n);
    for t in 0..3 {
        let phi: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (q, next) = layer.forward(&phi, &h)?;
        println!("step {t}: q = {q:.3?}");
        h = next;
    }

    let phi: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let cache = layer.forward_cached(&phi, &h)?;
    let grads = layer.backward(&phi, &h, &cache, &vec![1.0; n])?;

    let eps = 1e-6;
    let fd = |set: &dyn Fn(&mut RingRnnLayer, f64), at: f64| {
        let (mut up, mut down) = (layer.clone(), layer.clone());
        set(&mut up, at + eps);
        set(&mut down, at - eps);
        (loss(&up, &phi, &h) - loss(&down, &phi, &h)) / (2.0 * eps)
    };
    let checks = [
        ("lambda", grads.lambda, fd(&|l, x| l.set_lambda(x).unwrap(), layer.lambda())),
        ("tau", grads.tau, fd(&|l, x| l.set_tau(x).unwrap(), layer.tau())),
        ("beta", grads.beta, fd(&|l, x| l.set_beta(x), layer.beta())),
    ];
    for (name, analytic, numeric) in checks {
        println!("d(sum q)/d{name}: analytic {analytic:+.8}, finite difference {numeric:+.8}");
    }
    Ok(())
}
