use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::{AgentConfig, Variant};
use crate::envs::GridConfig;
use crate::error::{Error, Result};
use crate::ring::RingConfig;
use crate::ring_rnn::RnnConfig;

/// Everything needed to reproduce a batch of runs.
///
/// Missing sections take their defaults; unknown keys anywhere are rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: GridConfig,
    pub agent: AgentConfig,
    pub ring: RingConfig,
    pub rnn: RnnConfig,
    pub experiment: ExperimentSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSettings {
    /// Arms to run. Empty means just `agent.variant`.
    pub variants: Vec<Variant>,
    pub n_seeds: usize,
    pub episodes_per_run: usize,
    pub base_seed: u64,
    pub output_dir: PathBuf,
    /// Fill the `wallclock_ms` column. Off by default so that repeated runs
    /// produce byte-identical files.
    pub record_wallclock: bool,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        Self {
            variants: Vec::new(),
            n_seeds: 10,
            episodes_per_run: 300,
            base_seed: 0,
            output_dir: PathBuf::from("runs"),
            record_wallclock: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment.n_seeds == 0 {
            return Err(Error::Config("experiment.n_seeds must be at least 1".into()));
        }
        if self.experiment.episodes_per_run == 0 {
            return Err(Error::Config("experiment.episodes_per_run must be positive".into()));
        }
        self.env.validate()?;
        self.agent.validate()?;
        self.ring.validate()?;
        self.rnn.validate()?;
        let mut seen = Vec::new();
        for v in self.variants() {
            if seen.contains(&v) {
                return Err(Error::Config(format!("variant {v} listed twice")));
            }
            seen.push(v);
        }
        Ok(())
    }

    pub fn variants(&self) -> Vec<Variant> {
        if self.experiment.variants.is_empty() {
            vec![self.agent.variant]
        } else {
            self.experiment.variants.clone()
        }
    }

    /// Agent settings for one arm.
    pub fn agent_for(&self, variant: Variant) -> AgentConfig {
        AgentConfig {
            variant,
            ..self.agent.clone()
        }
    }
}
