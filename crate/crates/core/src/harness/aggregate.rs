use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RunRecord;
use crate::agents::Variant;
use crate::error::{Error, Result};

/// Learning-curve statistics of one arm across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub variant: Variant,
    pub seeds: Vec<usize>,
    /// Per-episode mean return across seeds.
    pub mean: Vec<f64>,
    /// Per-episode median return across seeds.
    pub median: Vec<f64>,
    /// Area under each run's learning curve (sum of episode returns),
    /// aligned with `seeds`.
    pub aulc: Vec<f64>,
    pub mean_aulc: f64,
    pub median_aulc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub episodes: usize,
    pub variants: Vec<VariantSummary>,
}

impl Summary {
    pub fn get(&self, variant: Variant) -> Option<&VariantSummary> {
        self.variants.iter().find(|v| v.variant == variant)
    }
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Per-variant mean and median curves plus area under the learning curve.
///
/// Records are ordered by seed before any summation, so the result does not
/// depend on the order of `records`.
pub fn aggregate(records: &[RunRecord]) -> Result<Summary> {
    let first = records
        .first()
        .ok_or_else(|| Error::InvalidArgument("no runs to aggregate".into()))?;
    let episodes = first.episodes.len();
    let mut groups: BTreeMap<Variant, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        if r.episodes.len() != episodes {
            return Err(Error::InvalidArgument(format!(
                "{} seed {} has {} episodes, expected {episodes}",
                r.variant,
                r.seed,
                r.episodes.len()
            )));
        }
        groups.entry(r.variant).or_default().push(r);
    }
    let mut variants = Vec::with_capacity(groups.len());
    for (variant, mut runs) in groups {
        runs.sort_by_key(|r| r.seed);
        if runs.windows(2).any(|w| w[0].seed == w[1].seed) {
            return Err(Error::InvalidArgument(format!("{variant}: duplicate seed")));
        }
        let curves: Vec<Vec<f64>> = runs.iter().map(|r| r.returns()).collect();
        let k = curves.len() as f64;
        let mut mean = Vec::with_capacity(episodes);
        let mut med = Vec::with_capacity(episodes);
        let mut column = Vec::with_capacity(curves.len());
        for e in 0..episodes {
            column.clear();
            column.extend(curves.iter().map(|c| c[e]));
            mean.push(column.iter().sum::<f64>() / k);
            med.push(median(&column));
        }
        let aulc: Vec<f64> = curves.iter().map(|c| c.iter().sum()).collect();
        variants.push(VariantSummary {
            variant,
            seeds: runs.iter().map(|r| r.seed).collect(),
            mean,
            median: med,
            mean_aulc: aulc.iter().sum::<f64>() / k,
            median_aulc: median(&aulc),
            aulc,
        });
    }
    Ok(Summary { episodes, variants })
}

pub fn write_summary(summary: &Summary, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(summary)? + "\n")?;
    Ok(())
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
