use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ringrl::agents::Variant;
use ringrl::harness::{
    aggregate, emit_curves, load_runs, read_summary, run_experiment, write_summary,
    ExperimentConfig, RunStatus, Summary,
};

#[derive(Parser)]
#[command(name = "ringrl", about = "Ring-attractor reinforcement learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every configured variant over several seeds.
    Train {
        /// Experiment config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Directory for run CSVs, manifest and summary.
        #[arg(long)]
        out: PathBuf,
        /// Override the number of seeds per variant.
        #[arg(long)]
        seeds: Option<usize>,
        /// Run only this variant.
        #[arg(long)]
        variant: Option<Variant>,
    },
    /// Compare a variant against its ablated twin.
    Ablate {
        /// Experiment config (JSON); its variant list is replaced by the pair.
        #[arg(long)]
        config: PathBuf,
        /// random-ring: Ring vs RingRandomMap. no-kernel: RnnRing vs RnnNoKernel.
        #[arg(long, value_enum)]
        mode: AblationMode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarise the runs in a directory into a JSON file.
    Aggregate {
        /// Run directory containing manifest.json.
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write learning curves (CSV and SVG) from a summary file.
    Plot {
        /// Summary JSON written by `aggregate` or `train`.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output path; written twice, with extensions `.csv` and `.svg`.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AblationMode {
    RandomRing,
    NoKernel,
}

fn print_table(summary: &Summary) {
    println!("{:<14} {:>6} {:>12} {:>12}", "variant", "seeds", "median AULC", "mean AULC");
    for v in &summary.variants {
        println!(
            "{:<14} {:>6} {:>12.3} {:>12.3}",
            v.variant.name(),
            v.seeds.len(),
            v.median_aulc,
            v.mean_aulc
        );
    }
}

fn train(mut config: ExperimentConfig, out: PathBuf) -> ringrl::Result<()> {
    config.experiment.output_dir = out.clone();
    let output = run_experiment(&config)?;
    let failed = output
        .manifest
        .runs
        .iter()
        .filter(|r| r.status != RunStatus::Ok)
        .count();
    println!(
        "{} runs written to {} ({failed} failed)",
        output.manifest.runs.len(),
        out.display()
    );
    if !output.records.is_empty() {
        let summary = aggregate(&output.records)?;
        write_summary(&summary, &out.join("summary.json"))?;
        print_table(&summary);
    }
    Ok(())
}

fn run(cli: Cli) -> ringrl::Result<()> {
    match cli.command {
        Command::Train {
            config,
            out,
            seeds,
            variant,
        } => {
            let mut config = ExperimentConfig::load(&config)?;
            if let Some(k) = seeds {
                config.experiment.n_seeds = k;
            }
            if let Some(v) = variant {
                config.experiment.variants = vec![v];
            }
            config.validate()?;
            train(config, out)
        }
        Command::Ablate { config, mode, out } => {
            let mut config = ExperimentConfig::load(&config)?;
            config.experiment.variants = match mode {
                AblationMode::RandomRing => vec![Variant::Ring, Variant::RingRandomMap],
                AblationMode::NoKernel => vec![Variant::RnnRing, Variant::RnnNoKernel],
            };
            train(config, out)
        }
        Command::Aggregate { input, out } => {
            let summary = aggregate(&load_runs(&input)?)?;
            write_summary(&summary, &out)?;
            print_table(&summary);
            Ok(())
        }
        Command::Plot { input, out } => emit_curves(&read_summary(&input)?, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
