//! Fit a Bayesian linear head per action and turn its uncertainty into ring input widths.
//!
//! Action 0 gets plenty of data, action 1 a handful, action 2 none at all. The
//! sampled standard deviations shrink with data, and narrower widths give
//! taller input peaks on the ring.
//!
//! Run with `cargo run --example uncertainty_head`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ringrl::envs::ActionMapping;
use ringrl::ring::{encode_actions, gaussian_input, RingAttractor, RingConfig};
use ringrl::uq::{action_stats, blr_update, BlrPrior};

fn main() -> ringrl::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let truth = [[1.0, -0.5], [0.4, 0.8], [0.0, 0.0]];
    let counts = [200, 5, 0];

    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for (a, &n) in counts.iter().enumerate() {
        for _ in 0..n {
            let phi = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let y = truth[a][0] * phi[0] + truth[a][1] * phi[1] + rng.random_range(-0.1..0.1);
            rows.push((a, phi));
            targets.push(y);
        }
    }
    let posterior = blr_update(BlrPrior::new(2, 1.0, 0.01)?, 3, &rows, &targets)?;

    let phi = [0.6, 0.3];
    let stats = action_stats(&posterior, &phi, 30, &mut rng)?;
    for a in 0..3 {
        println!(
            "action {a}: {:>3} observations, mean {:+.3}, sd {:.3}",
            counts[a], stats.mu[a], stats.sigma[a]
        );
    }

    let config = RingConfig::default();
    let mapping = ActionMapping::uniform(3);
    let signals = encode_actions(&stats.mu, &stats.sigma, &mapping)?;
    let input = gaussian_input(&signals, &config)?;
    for (a, s) in signals.iter().enumerate() {
        println!(
            "action {a}: amplitude {:.3}, width {:.3}, peak height {:.3}",
            s.amplitude,
            s.width,
            s.at(s.center)
        );
    }
    let strongest = input.iter().cloned().fold(0.0, f64::max);
    println!("strongest ring input {strongest:.3}");
    let decision = RingAttractor::new(config)?.select(&stats.mu, &stats.sigma, &mapping)?;
    println!("ring chooses action {}", decision.action);
    Ok(())
}
