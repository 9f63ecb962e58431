//! Seeded multi-run experiments: configuration, execution, persistence,
//! aggregation and learning-curve output.

mod aggregate;
mod config;
mod curves;
mod run;

pub use aggregate::{aggregate, read_summary, write_summary, Summary, VariantSummary};
pub use config::{ExperimentConfig, ExperimentSettings};
pub use curves::emit_curves;
pub use run::{
    load_runs, read_run_csv, run_experiment, run_seed, run_single, write_run_csv, EpisodeRow,
    ExperimentOutput, Manifest, RunRecord, RunStatus, MANIFEST_FILE, RUN_CSV_HEADER,
};

/// Version tag of the on-disk artifact layout, echoed in every manifest.
pub const SCHEMA_VERSION: &str = "1";
