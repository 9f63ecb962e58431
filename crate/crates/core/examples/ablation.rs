//! Compare the ring with and without the learned action placement.
//!
//! Shuffling where actions sit on the ring breaks the link between ring
//! neighbours and similar actions. Three seeds of 100 episodes keep this short;
//! `ringrl ablate` runs the full version.
//!
//! Run with `cargo run --release --example ablation`.

use ringrl::agents::Variant;
use ringrl::harness::{aggregate, run_single, ExperimentConfig, RunRecord};

fn main() -> ringrl::Result<()> {
    let mut config = ExperimentConfig::default();
    config.agent.learning_rate = Some(0.2);
    config.ring.settle_max_steps = 1000;
    config.ring.settle_tolerance = 1e-6;
    config.experiment.episodes_per_run = 100;

    let mut records: Vec<RunRecord> = Vec::new();
    for variant in [Variant::Ring, Variant::RingRandomMap] {
        for seed in 0..3 {
            let record = run_single(&config, variant, seed).map_err(|(e, _)| e)?;
            println!("{variant:<14} seed {seed}: area under curve {:+.1}", record.returns().iter().sum::<f64>());
            records.push(record);
        }
    }
    for v in aggregate(&records)?.variants {
        println!("{:<14} median area under curve {:+.1}", v.variant, v.median_aulc);
    }
    Ok(())
}
