//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::benchmarks::{ArchiveStrategy, ArmGrid, SourceGroup, TaskSpec};
use crate::ea::{EaConfig, TransferMode};
use crate::error::{Error, Result};
use crate::similarity::HyperParams;
use crate::types::Representation;

/// Where the source archive comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ArchiveSource {
    /// A saved archive, relative to the config file's directory.
    Path(PathBuf),
    Recipe(ArchiveRecipe),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchiveRecipe {
    pub groups: Vec<SourceGroup>,
    /// Evaluations spent on each source.
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default)]
    pub strategy: ArchiveStrategy,
    #[serde(default)]
    pub seed: u64,
}

fn default_budget() -> u64 {
    5000
}

/// Values tried per hyper-parameter, one axis at a time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepGrid {
    pub temperature: Vec<f64>,
    pub learning_rate: Vec<f64>,
    pub neutralization: Vec<f64>,
    pub transfer_interval: Vec<u32>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            temperature: vec![0.001, 0.002, 0.01, 0.02, 0.1, 1.0],
            learning_rate: vec![0.5, 0.7, 0.8, 0.85, 0.9, 0.95, 0.99, 1.0],
            neutralization: vec![1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0],
            transfer_interval: vec![2, 4, 6, 8, 10],
        }
    }
}

/// One point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub axis: &'static str,
    pub value: f64,
    pub hyper: HyperParams,
}

impl SweepGrid {
    pub fn is_empty(&self) -> bool {
        self.temperature.is_empty()
            && self.learning_rate.is_empty()
            && self.neutralization.is_empty()
            && self.transfer_interval.is_empty()
    }

    /// Every setting with one axis changed from `base`.
    pub fn points(&self, base: &HyperParams) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for &v in &self.temperature {
            out.push(SweepPoint {
                axis: "temperature",
                value: v,
                hyper: HyperParams { temperature: v, ..*base },
            });
        }
        for &v in &self.learning_rate {
            out.push(SweepPoint {
                axis: "learning_rate",
                value: v,
                hyper: HyperParams { learning_rate: v, ..*base },
            });
        }
        for &v in &self.neutralization {
            out.push(SweepPoint {
                axis: "neutralization",
                value: v,
                hyper: HyperParams { neutralization: v, ..*base },
            });
        }
        for &v in &self.transfer_interval {
            out.push(SweepPoint {
                axis: "transfer_interval",
                value: v as f64,
                hyper: HyperParams {
                    transfer_interval: v,
                    ..*base
                },
            });
        }
        out
    }
}

/// Archive-size scaling study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    /// Source counts to test; each keeps `related` related sources.
    pub totals: Vec<usize>,
    pub related: usize,
    #[serde(default = "scaling_algorithms")]
    pub algorithms: Vec<TransferMode>,
}

fn scaling_algorithms() -> Vec<TransferMode> {
    vec![TransferMode::Streo, TransferMode::Amtea, TransferMode::MabAmtea]
}

fn default_algorithms() -> Vec<TransferMode> {
    vec![TransferMode::Streo]
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub target: TaskSpec,
    #[serde(default)]
    pub archive: Option<ArchiveSource>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<TransferMode>,
    #[serde(default)]
    pub ea: EaConfig,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub sweep: SweepGrid,
    #[serde(default)]
    pub scaling: Option<ScalingConfig>,
    #[serde(default)]
    pub heatmap: Option<ArmGrid>,
}

impl ExperimentConfig {
    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_slice(bytes)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        ExperimentConfig::from_slice(&bytes)
    }

    pub fn validate(&self) -> Result<()> {
        self.ea.validate()?;
        self.target.build()?;
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        if let Some(ArchiveSource::Recipe(r)) = &self.archive {
            if r.groups.is_empty() {
                return Err(Error::Config("archive recipe has no groups".into()));
            }
            for g in &r.groups {
                let repr = match g {
                    SourceGroup::Knapsack { .. } => Representation::Binary,
                    SourceGroup::Arm { .. } => Representation::Real,
                };
                if repr != self.target.representation() {
                    return Err(Error::Config(format!(
                        "{repr} source group for a {} target",
                        self.target.representation()
                    )));
                }
            }
        }
        if let Some(s) = &self.scaling {
            if s.totals.is_empty() || s.algorithms.is_empty() {
                return Err(Error::Config("scaling study needs totals and algorithms".into()));
            }
            if let Some(t) = s.totals.iter().find(|t| **t < s.related) {
                return Err(Error::Config(format!(
                    "scaling total {t} is smaller than the related count {}",
                    s.related
                )));
            }
        }
        Ok(())
    }

    /// Stable digest of the effective configuration.
    pub fn hash(&self) -> Result<String> {
        canonical_hash(self)
    }
}

/// SHA-256 of the sorted-key JSON form of `value`, hex encoded.
pub fn canonical_hash<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    // Value maps are ordered by key, which makes the encoding canonical
    let canonical = serde_json::to_vec(&serde_json::to_value(value)?)?;
    let digest = Sha256::digest(&canonical);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Parses `a,b,c` into seeds.
pub fn parse_seed_list(text: &str) -> Result<Vec<u64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Config("seed list is empty".into()));
    }
    text.split(',')
        .map(|item| {
            let item = item.trim();
            item.parse::<u64>()
                .map_err(|_| Error::Config(format!("invalid seed {item:?}")))
        })
        .collect()
}
