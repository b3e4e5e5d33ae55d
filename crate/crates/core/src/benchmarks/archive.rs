//! Source task descriptions and the pipeline that turns solved source tasks
//! into a frozen model archive.

use std::f64::consts::SQRT_2;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::arm::ArmTask;
use super::knapsack::{gen_knapsack, CapacityKind, Correlation};
use crate::baselines::run_amtea;
use crate::ea::{run, EaConfig, TransferMode};
use crate::error::{Error, Result};
use crate::models::SearchModel;
use crate::rng::RngHandle;
use crate::types::{Representation, Task};

/// Parameters that fully determine a benchmark task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskSpec {
    Knapsack {
        dim: usize,
        correlation: Correlation,
        capacity: CapacityKind,
        seed: u64,
    },
    Arm {
        joints: usize,
        length: f64,
        max_angle: f64,
    },
}

impl TaskSpec {
    pub fn build(&self) -> Result<Box<dyn Task>> {
        Ok(match *self {
            TaskSpec::Knapsack {
                dim,
                correlation,
                capacity,
                seed,
            } => Box::new(gen_knapsack(dim, correlation, capacity, seed)?),
            TaskSpec::Arm {
                joints,
                length,
                max_angle,
            } => Box::new(ArmTask::new(length, max_angle, joints)?),
        })
    }

    pub fn dim(&self) -> usize {
        match *self {
            TaskSpec::Knapsack { dim, .. } => dim,
            TaskSpec::Arm { joints, .. } => joints,
        }
    }

    pub fn representation(&self) -> Representation {
        match self {
            TaskSpec::Knapsack { .. } => Representation::Binary,
            TaskSpec::Arm { .. } => Representation::Real,
        }
    }

    /// Short family label, e.g. `KP_sc_ac` or `arm`.
    pub fn category(&self) -> String {
        match self {
            TaskSpec::Knapsack {
                correlation, capacity, ..
            } => format!("KP_{correlation}_{capacity}"),
            TaskSpec::Arm { .. } => "arm".into(),
        }
    }
}

/// Descriptive data carried next to each source model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceMeta {
    pub category: String,
    pub related: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<TaskSpec>,
}

/// A source task waiting to be solved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub task: TaskSpec,
    pub related: bool,
}

/// Ordered frozen source models over one search space.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceArchive {
    representation: Representation,
    dim: usize,
    creation_seed: u64,
    models: Vec<SearchModel>,
    meta: Vec<SourceMeta>,
}

impl SourceArchive {
    pub fn empty(representation: Representation, dim: usize, creation_seed: u64) -> Self {
        SourceArchive {
            representation,
            dim,
            creation_seed,
            models: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn push(&mut self, model: SearchModel, meta: SourceMeta) -> Result<()> {
        if model.representation() != self.representation {
            return Err(Error::Archive(format!(
                "{} model in a {} archive",
                model.representation(),
                self.representation
            )));
        }
        if model.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: model.dim(),
            });
        }
        self.models.push(model);
        self.meta.push(meta);
        Ok(())
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn creation_seed(&self) -> u64 {
        self.creation_seed
    }

    pub fn models(&self) -> &[SearchModel] {
        &self.models
    }

    pub fn meta(&self) -> &[SourceMeta] {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn related_flags(&self) -> Vec<bool> {
        self.meta.iter().map(|m| m.related).collect()
    }

    /// The archive restricted to the given source indices, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<SourceArchive> {
        let mut out = SourceArchive::empty(self.representation, self.dim, self.creation_seed);
        for &i in indices {
            let model = self
                .models
                .get(i)
                .ok_or_else(|| Error::InvalidInput(format!("source index {i} out of range")))?;
            out.push(model.clone(), self.meta[i].clone())?;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ArchiveStrategy {
    /// Every source solved independently without transfer.
    #[default]
    Cga,
    /// Source `k` solved with EM stacking over sources `0..k`.
    AmteaSequential,
}

/// Solves each source with `budget` evaluations and fits a model on its
/// final population.
pub fn build_source_archive(
    specs: &[SourceSpec],
    budget: u64,
    strategy: ArchiveStrategy,
    ea: &EaConfig,
    rng: &RngHandle,
) -> Result<SourceArchive> {
    let first = specs
        .first()
        .ok_or_else(|| Error::InvalidInput("no source tasks to solve".into()))?;
    let (representation, dim) = (first.task.representation(), first.task.dim());
    if let Some(bad) = specs
        .iter()
        .find(|s| s.task.representation() != representation || s.task.dim() != dim)
    {
        return Err(Error::InvalidInput(format!(
            "source {} does not share the {representation} space of dimension {dim}",
            bad.task.category()
        )));
    }
    if budget < ea.population_size as u64 {
        return Err(Error::InvalidInput(format!(
            "budget {budget} cannot fill a population of {}",
            ea.population_size
        )));
    }
    let cfg = EaConfig {
        max_evaluations: budget,
        transfer: TransferMode::None,
        ..ea.clone()
    };
    let meta = |s: &SourceSpec| SourceMeta {
        category: s.task.category(),
        related: s.related,
        task: Some(s.task.clone()),
    };
    let mut archive = SourceArchive::empty(representation, dim, rng.seed());
    match strategy {
        ArchiveStrategy::Cga => {
            let models: Vec<SearchModel> = specs
                .par_iter()
                .enumerate()
                .map(|(k, s)| {
                    let task = s.task.build()?;
                    let rec = run(task.as_ref(), &[], &cfg, &rng.child_indexed("source", k as u64))?;
                    SearchModel::fit(&rec.final_population, task.space())
                })
                .collect::<Result<_>>()?;
            for (m, s) in models.into_iter().zip(specs) {
                archive.push(m, meta(s))?;
            }
        }
        ArchiveStrategy::AmteaSequential => {
            for (k, s) in specs.iter().enumerate() {
                let task = s.task.build()?;
                let child = rng.child_indexed("source", k as u64);
                let rec = if archive.is_empty() {
                    run(task.as_ref(), &[], &cfg, &child)?
                } else {
                    run_amtea(task.as_ref(), archive.models(), &cfg, &child)?
                };
                let model = SearchModel::fit(&rec.final_population, task.space())?;
                archive.push(model, meta(s))?;
            }
        }
    }
    Ok(archive)
}

/// A block of similar sources in a recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SourceGroup {
    /// `count` knapsack instances of one family, each with its own seed.
    Knapsack {
        correlation: Correlation,
        capacity: CapacityKind,
        count: usize,
        related: bool,
    },
    /// `count` arms with length and angle scale drawn uniformly from the
    /// half-open ranges `(lo, hi]`.
    Arm {
        count: usize,
        related: bool,
        length: (f64, f64),
        max_angle: (f64, f64),
    },
}

impl SourceGroup {
    pub fn count(&self) -> usize {
        match self {
            SourceGroup::Knapsack { count, .. } | SourceGroup::Arm { count, .. } => *count,
        }
    }

    /// Arms with full joint range: they share the reach-for-(1, 1) optimum.
    pub fn related_arms(count: usize) -> Self {
        SourceGroup::Arm {
            count,
            related: true,
            length: (0.0, SQRT_2),
            max_angle: (1.0, 1.0),
        }
    }

    /// Arms whose joints are too stiff to reach the target.
    pub fn unrelated_arms(count: usize) -> Self {
        SourceGroup::Arm {
            count,
            related: false,
            length: (0.0, SQRT_2),
            max_angle: (0.18, 0.26),
        }
    }
}

fn draw_in<R: Rng + ?Sized>(range: (f64, f64), rng: &mut R) -> f64 {
    let (lo, hi) = range;
    // (lo, hi]: the upper end is a valid parameter, the lower may not be
    hi - (hi - lo) * rng.random::<f64>()
}

/// Expands recipe groups into concrete, shuffled source specs over a
/// `dim`-dimensional space.
pub fn expand_groups(groups: &[SourceGroup], dim: usize, rng: &RngHandle) -> Result<Vec<SourceSpec>> {
    if groups.iter().map(SourceGroup::count).sum::<usize>() == 0 {
        return Err(Error::Config("recipe produces no sources".into()));
    }
    let mut draw = rng.child("recipe").rng();
    let mut specs = Vec::new();
    for g in groups {
        match *g {
            SourceGroup::Knapsack {
                correlation,
                capacity,
                count,
                related,
            } => {
                for _ in 0..count {
                    specs.push(SourceSpec {
                        task: TaskSpec::Knapsack {
                            dim,
                            correlation,
                            capacity,
                            seed: draw.random(),
                        },
                        related,
                    });
                }
            }
            SourceGroup::Arm {
                count,
                related,
                length,
                max_angle,
            } => {
                let ok = |r: (f64, f64), hi: f64| 0.0 <= r.0 && r.0 <= r.1 && r.1 <= hi && r.1 > 0.0;
                if !ok(length, SQRT_2) || !ok(max_angle, 1.0) {
                    return Err(Error::Config(format!(
                        "arm ranges length {length:?} / max angle {max_angle:?} out of bounds"
                    )));
                }
                for _ in 0..count {
                    specs.push(SourceSpec {
                        task: TaskSpec::Arm {
                            joints: dim,
                            length: draw_in(length, &mut draw),
                            max_angle: draw_in(max_angle, &mut draw),
                        },
                        related,
                    });
                }
            }
        }
    }
    specs.shuffle(&mut draw);
    Ok(specs)
}
