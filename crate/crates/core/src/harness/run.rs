use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, SCHEMA_VERSION};
use crate::agents::{Agent, Variant};
use crate::envs::{Environment, GridWorld};
use crate::error::{Error, Result};

pub const RUN_CSV_HEADER: &str = "seed,variant,episode,steps,return,wallclock_ms";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub episode: usize,
    pub steps: usize,
    #[serde(rename = "return")]
    pub ret: f64,
    pub wallclock_ms: u64,
}

/// Per-episode results of one (variant, seed) run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: usize,
    pub variant: Variant,
    pub episodes: Vec<EpisodeRow>,
}

impl RunRecord {
    pub fn returns(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.ret).collect()
    }

    fn check_contiguous(&self) -> Result<()> {
        for (i, e) in self.episodes.iter().enumerate() {
            if e.episode != i {
                return Err(Error::InvalidArgument(format!(
                    "{} seed {}: episode index {} at row {i}",
                    self.variant, self.seed, e.episode
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRun {
    pub variant: Variant,
    pub seed: usize,
    pub rng_seed: u64,
    pub file: String,
    #[serde(flatten)]
    pub status: RunStatus,
    /// Episodes that ran to completion before the run ended.
    pub episodes: usize,
    /// Final recurrent layer parameters, for successful recurrent runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: String,
    pub git_describe: Option<String>,
    pub config: ExperimentConfig,
    pub runs: Vec<ManifestRun>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    /// Successful runs in (variant, seed) order.
    pub records: Vec<RunRecord>,
    pub manifest: Manifest,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Generator seed of one run, derived from the base seed, the variant name
/// and the seed index. Stable across platforms and variant orderings.
pub fn run_seed(base_seed: u64, variant: Variant, seed_index: usize) -> u64 {
    // FNV-1a over the name
    let name_hash = variant
        .name()
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    splitmix64(splitmix64(splitmix64(base_seed) ^ name_hash) ^ seed_index as u64)
}

fn csv_name(variant: Variant, seed: usize) -> String {
    format!("{}_seed{seed:03}.csv", variant.name())
}

fn checkpoint_name(variant: Variant, seed: usize) -> String {
    format!("{}_seed{seed:03}.layer.json", variant.name())
}

/// Train one agent for `episodes_per_run` episodes.
///
/// On failure the error comes back together with the episodes that finished.
pub fn run_single(
    config: &ExperimentConfig,
    variant: Variant,
    seed: usize,
) -> std::result::Result<RunRecord, (Error, RunRecord)> {
    let mut record = RunRecord {
        seed,
        variant,
        episodes: Vec::with_capacity(config.experiment.episodes_per_run),
    };
    match run_episodes(config, &mut record) {
        Ok(_) => Ok(record),
        Err(e) => Err((e, record)),
    }
}

fn run_episodes(config: &ExperimentConfig, record: &mut RunRecord) -> Result<Agent> {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed(
        config.experiment.base_seed,
        record.variant,
        record.seed,
    ));
    let mut env = GridWorld::new(config.env.clone())?;
    let mut agent = Agent::new(
        config.agent_for(record.variant),
        &config.ring,
        &config.rnn,
        env.observation_len(),
        env.n_actions(),
        &mut rng,
    )?;
    for episode in 0..config.experiment.episodes_per_run {
        let started = Instant::now();
        let mut obs = env.reset(rng.random());
        agent.begin_episode();
        let (mut steps, mut ret) = (0, 0.0);
        loop {
            let action = agent.select_action(&obs, &mut rng)?;
            let out = env.step(action)?;
            steps += 1;
            ret += out.reward;
            let terminal = out.done && !out.truncated;
            agent.observe(obs, action, out.reward, out.observation.clone(), terminal);
            agent.learn(&mut rng)?;
            obs = out.observation;
            if out.done {
                break;
            }
        }
        let wallclock_ms = if config.experiment.record_wallclock {
            started.elapsed().as_millis() as u64
        } else {
            0
        };
        record.episodes.push(EpisodeRow {
            episode,
            steps,
            ret,
            wallclock_ms,
        });
    }
    if agent.fallbacks() > 0 {
        warn!(
            "{} seed {}: {} argmax fallbacks",
            record.variant,
            record.seed,
            agent.fallbacks()
        );
    }
    Ok(agent)
}

pub fn write_run_csv(record: &RunRecord, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RUN_CSV_HEADER.split(','))?;
    for e in &record.episodes {
        w.write_record([
            record.seed.to_string(),
            record.variant.name().to_string(),
            e.episode.to_string(),
            e.steps.to_string(),
            e.ret.to_string(),
            e.wallclock_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_run_csv(path: &Path) -> Result<RunRecord> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != RUN_CSV_HEADER {
        return Err(Error::InvalidArgument(format!(
            "{}: unexpected header {:?}",
            path.display(),
            header.join(",")
        )));
    }
    let mut meta: Option<(usize, Variant)> = None;
    let mut episodes = Vec::new();
    for (line, row) in r.records().enumerate() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or_default();
        let bad = |what: &str| {
            Error::InvalidArgument(format!("{}: bad {what} in data row {line}", path.display()))
        };
        let seed: usize = field(0).parse().map_err(|_| bad("seed"))?;
        let variant: Variant = field(1).parse()?;
        match meta {
            None => meta = Some((seed, variant)),
            Some(m) if m != (seed, variant) => {
                return Err(Error::InvalidArgument(format!(
                    "{}: mixes runs {m:?} and {:?}",
                    path.display(),
                    (seed, variant)
                )))
            }
            Some(_) => {}
        }
        episodes.push(EpisodeRow {
            episode: field(2).parse().map_err(|_| bad("episode"))?,
            steps: field(3).parse().map_err(|_| bad("steps"))?,
            ret: field(4).parse().map_err(|_| bad("return"))?,
            wallclock_ms: field(5).parse().map_err(|_| bad("wallclock_ms"))?,
        });
    }
    let (seed, variant) = meta
        .ok_or_else(|| Error::InvalidArgument(format!("{}: no rows", path.display())))?;
    let record = RunRecord {
        seed,
        variant,
        episodes,
    };
    record.check_contiguous()?;
    Ok(record)
}

/// Load every successful run listed in the manifest of `dir`.
pub fn load_runs(dir: &Path) -> Result<Vec<RunRecord>> {
    let manifest = Manifest::load(dir)?;
    manifest
        .runs
        .iter()
        .filter(|r| r.status == RunStatus::Ok)
        .map(|r| read_run_csv(&dir.join(&r.file)))
        .collect()
}

fn git_describe() -> Option<String> {
    let out = std::process::Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()?;
    if !out.status.success() {
        return None;
    }
    let s = String::from_utf8(out.stdout).ok()?.trim().to_string();
    (!s.is_empty()).then_some(s)
}

fn check_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let probe: PathBuf = dir.join(".write-probe");
    fs::write(&probe, b"")?;
    fs::remove_file(&probe)?;
    Ok(())
}

/// Run every (variant, seed) pair, writing one CSV per run and a manifest.
///
/// Runs execute in parallel and share nothing but the config, so the files
/// do not depend on scheduling. A run that fails numerically is recorded as
/// failed in the manifest while the others proceed.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let dir = &config.experiment.output_dir;
    check_writable(dir)?;
    let jobs: Vec<(Variant, usize)> = config
        .variants()
        .into_iter()
        .flat_map(|v| (0..config.experiment.n_seeds).map(move |s| (v, s)))
        .collect();
    info!("running {} runs into {}", jobs.len(), dir.display());
    let results: Vec<Result<(ManifestRun, Option<RunRecord>)>> = jobs
        .par_iter()
        .map(|&(variant, seed)| {
            let file = csv_name(variant, seed);
            let mut record = RunRecord {
                seed,
                variant,
                episodes: Vec::with_capacity(config.experiment.episodes_per_run),
            };
            let mut checkpoint = None;
            let status = match run_episodes(config, &mut record) {
                Ok(agent) => {
                    if let Some(layer) = agent.online().rnn_layer() {
                        let name = checkpoint_name(variant, seed);
                        layer.save(&dir.join(&name))?;
                        checkpoint = Some(name);
                    }
                    RunStatus::Ok
                }
                Err(e) => {
                    warn!("{variant} seed {seed} failed: {e}");
                    RunStatus::Failed { error: e.to_string() }
                }
            };
            write_run_csv(&record, &dir.join(&file))?;
            let entry = ManifestRun {
                variant,
                seed,
                rng_seed: run_seed(config.experiment.base_seed, variant, seed),
                file,
                episodes: record.episodes.len(),
                status: status.clone(),
                checkpoint,
            };
            Ok((entry, (status == RunStatus::Ok).then_some(record)))
        })
        .collect();
    let mut runs = Vec::with_capacity(jobs.len());
    let mut records = Vec::new();
    for r in results {
        let (entry, record) = r?;
        runs.push(entry);
        records.extend(record);
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION.to_string(),
        git_describe: git_describe(),
        config: config.clone(),
        runs,
    };
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(ExperimentOutput { records, manifest })
}
