//! How well each source model's samples score on a target task.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::arm::ArmTask;
use crate::ea::{check_sources, run, EaConfig, TransferMode};
use crate::error::{Error, Result};
use crate::models::SearchModel;
use crate::rng::RngHandle;
use crate::types::{evaluate, Task, WriteBack};

/// Mean target fitness of `samples` draws from each source model.
pub fn relatedness_heatmap(
    sources: &[SearchModel],
    target: &dyn Task,
    samples: usize,
    rng: &RngHandle,
) -> Result<Vec<f64>> {
    check_sources(target, sources)?;
    if samples == 0 {
        return Err(Error::InvalidInput("need at least one sample per source".into()));
    }
    let bounds = target.space().bounds();
    sources
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let mut r = rng.child_indexed("heatmap", k as u64).rng();
            let draws = (0..samples).map(|_| m.sample(&mut r, bounds)).collect();
            Ok(evaluate(target, draws, WriteBack::Baldwinian)?.mean_fitness())
        })
        .collect()
}

/// Grid of arm sources scored against one arm target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArmGrid {
    pub joints: usize,
    pub lengths: Vec<f64>,
    pub max_angles: Vec<f64>,
    pub target_length: f64,
    pub target_max_angle: f64,
    pub samples_per_source: usize,
    /// Evaluations spent solving each grid source.
    pub budget: u64,
}

impl Default for ArmGrid {
    fn default() -> Self {
        let s = std::f64::consts::SQRT_2;
        ArmGrid {
            joints: 10,
            lengths: vec![0.2 * s, 0.4 * s, 0.6 * s, 0.8 * s, s],
            max_angles: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            target_length: s,
            target_max_angle: 1.0,
            samples_per_source: 100,
            budget: 5000,
        }
    }
}

/// Rows follow `lengths`, columns follow `max_angles`.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub lengths: Vec<f64>,
    pub max_angles: Vec<f64>,
    pub cells: Vec<Vec<f64>>,
}

impl Heatmap {
    pub fn cell(&self, length_index: usize, angle_index: usize) -> f64 {
        self.cells[length_index][angle_index]
    }
}

/// Solves one arm per grid cell without transfer, fits a Gaussian on its
/// final population and scores that model on the target.
pub fn arm_heatmap(grid: &ArmGrid, ea: &EaConfig, rng: &RngHandle) -> Result<Heatmap> {
    if grid.lengths.is_empty() || grid.max_angles.is_empty() {
        return Err(Error::Config("heatmap grid is empty".into()));
    }
    let target = ArmTask::new(grid.target_length, grid.target_max_angle, grid.joints)?;
    let cfg = EaConfig {
        max_evaluations: grid.budget,
        transfer: TransferMode::None,
        ..ea.clone()
    };
    let cols = grid.max_angles.len();
    let cells: Vec<(usize, usize)> = (0..grid.lengths.len())
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .collect();
    let scores: Vec<f64> = cells
        .par_iter()
        .map(|&(r, c)| {
            let index = (r * cols + c) as u64;
            let source = ArmTask::new(grid.lengths[r], grid.max_angles[c], grid.joints)?;
            let rec = run(&source, &[], &cfg, &rng.child_indexed("cell", index))?;
            let model = SearchModel::fit(&rec.final_population, source.space())?;
            let scored = relatedness_heatmap(
                std::slice::from_ref(&model),
                &target,
                grid.samples_per_source,
                &rng.child_indexed("cell-samples", index),
            )?;
            Ok(scored[0])
        })
        .collect::<Result<_>>()?;
    Ok(Heatmap {
        lengths: grid.lengths.clone(),
        max_angles: grid.max_angles.clone(),
        cells: scores.chunks(cols).map(<[f64]>::to_vec).collect(),
    })
}
