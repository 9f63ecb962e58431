//! The full pipeline in one go: seeded runs, CSVs and manifest, aggregation, curves.
//!
//! Writes into `target/pipeline-demo/`. Run with
//! `cargo run --release --example experiment_pipeline`.

use std::path::PathBuf;

use ringrl::agents::Variant;
use ringrl::harness::{aggregate, emit_curves, load_runs, run_experiment, write_summary, ExperimentConfig};

fn main() -> ringrl::Result<()> {
    let out = PathBuf::from("target/pipeline-demo");
    let mut config = ExperimentConfig::default();
    config.agent.learning_rate = Some(0.2);
    config.experiment.variants = vec![Variant::Baseline, Variant::RnnRing, Variant::RnnNoKernel];
    config.experiment.n_seeds = 3;
    config.experiment.episodes_per_run = 50;
    config.experiment.output_dir = out.clone();

    let output = run_experiment(&config)?;
    println!("{} runs written to {}", output.manifest.runs.len(), out.display());

    // Reload from disk to show the files are self-contained.
    let records = load_runs(&out)?;
    let summary = aggregate(&records)?;
    write_summary(&summary, &out.join("summary.json"))?;
    emit_curves(&summary, &out.join("curves"))?;
    for v in &summary.variants {
        println!(
            "{:<12} seeds {} median AULC {:+.1} final-episode median return {:+.2}",
            v.variant,
            v.seeds.len(),
            v.median_aulc,
            v.median.last().copied().unwrap_or(f64::NAN)
        );
    }
    println!("curves at {}", out.join("curves.svg").display());
    Ok(())
}
