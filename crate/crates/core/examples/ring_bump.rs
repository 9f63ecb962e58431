//! Fuse eight action values on a 64-neuron ring and watch the bump form.
//!
//! Run with `cargo run --example ring_bump`.

use ringrl::envs::ActionMapping;
use ringrl::ring::{RingAttractor, RingConfig, CONSTANT_ACTION_SIGMA};

fn bar(v: f64, peak: f64) -> String {
    "#".repeat(((v / peak) * 40.0).round() as usize)
}

fn main() -> ringrl::Result<()> {
    let ring = RingAttractor::new(RingConfig::default())?;
    let mapping = ActionMapping::uniform(8);
    // Two close competitors at actions 2 and 3, everything else weaker.
    let q = [0.1, 0.3, 0.9, 0.85, 0.2, 0.0, 0.1, 0.05];
    let sigmas = [CONSTANT_ACTION_SIGMA; 8];

    let decision = ring.select(&q, &sigmas, &mapping)?;
    let v = &decision.settled.state.v;
    let peak = v.iter().cloned().fold(0.0, f64::max);
    println!(
        "settled in {} steps (converged: {})",
        decision.settled.steps, decision.settled.converged
    );
    for (n, &x) in v.iter().enumerate() {
        let marker = if n % 8 == 0 { format!("a{}", n / 8) } else { String::new() };
        println!("{marker:>3} {n:>2} {x:8.4} {}", bar(x, peak));
    }
    println!("decoded action: {}", decision.action);
    Ok(())
}
