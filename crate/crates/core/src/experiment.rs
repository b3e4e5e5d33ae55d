//! Experiment drivers: archive materialization, seed × algorithm matrices,
//! hyper-parameter sweeps and archive-size scaling.
//!
//! Runs are independent and fan out over a worker pool. Results always come
//! back in input order, so outputs do not depend on scheduling.

use std::path::Path;

use rayon::prelude::*;

use crate::benchmarks::{build_source_archive, expand_groups, SourceArchive, TaskSpec};
use crate::ea::{run, EaConfig, RunRecord, TransferMode};
use crate::error::{Error, Result};
use crate::io::config::{ArchiveSource, ScalingConfig, SweepGrid};
use crate::io::load_archive;
use crate::models::SearchModel;
use crate::rng::RngHandle;
use crate::types::Task;

/// Runs `f` on a pool of `workers` threads (0 picks the machine default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

/// Loads or builds the archive described by `source`. Relative paths resolve
/// against `base_dir`.
pub fn materialize_archive(
    source: &ArchiveSource,
    target: &TaskSpec,
    ea: &EaConfig,
    base_dir: &Path,
) -> Result<SourceArchive> {
    let archive = match source {
        ArchiveSource::Path(p) => load_archive(&base_dir.join(p))?,
        ArchiveSource::Recipe(r) => {
            let rng = RngHandle::new(r.seed);
            let specs = expand_groups(&r.groups, target.dim(), &rng)?;
            build_source_archive(&specs, r.budget, r.strategy, ea, &rng)?
        }
    };
    if archive.representation() != target.representation() || archive.dim() != target.dim() {
        return Err(Error::Config(format!(
            "archive space ({}, d={}) does not match the target ({}, d={})",
            archive.representation(),
            archive.dim(),
            target.representation(),
            target.dim()
        )));
    }
    Ok(archive)
}

/// One run per (algorithm, seed), algorithm-major. Every algorithm sees the
/// same seeds, so runs are paired.
pub fn run_matrix(
    task: &dyn Task,
    sources: &[SearchModel],
    ea: &EaConfig,
    algorithms: &[TransferMode],
    seeds: &[u64],
) -> Result<Vec<RunRecord>> {
    let jobs: Vec<(TransferMode, u64)> = algorithms
        .iter()
        .flat_map(|&a| seeds.iter().map(move |&s| (a, s)))
        .collect();
    jobs.par_iter()
        .map(|&(mode, seed)| {
            let cfg = EaConfig {
                transfer: mode,
                ..ea.clone()
            };
            let sources = if mode == TransferMode::None { &[][..] } else { sources };
            run(task, sources, &cfg, &RngHandle::new(seed))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: &'static str,
    pub value: f64,
    pub seed: u64,
    pub best_fitness: f64,
    pub evaluations: u64,
}

pub const SWEEP_HEADER: [&str; 5] = ["axis", "value", "seed", "best_fitness", "evaluations"];

impl SweepRow {
    pub fn fields(&self) -> Vec<String> {
        vec![
            self.axis.to_string(),
            self.value.to_string(),
            self.seed.to_string(),
            self.best_fitness.to_string(),
            self.evaluations.to_string(),
        ]
    }
}

/// sTrEO over every grid point and seed, one axis varied at a time.
pub fn run_sweep(
    task: &dyn Task,
    sources: &[SearchModel],
    ea: &EaConfig,
    grid: &SweepGrid,
    seeds: &[u64],
) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    let jobs: Vec<_> = grid
        .points(&ea.hyper)
        .into_iter()
        .flat_map(|p| seeds.iter().map(move |&s| (p, s)))
        .collect();
    jobs.par_iter()
        .map(|&(point, seed)| {
            let cfg = EaConfig {
                transfer: TransferMode::Streo,
                hyper: point.hyper,
                ..ea.clone()
            };
            let rec = run(task, sources, &cfg, &RngHandle::new(seed))?;
            Ok(SweepRow {
                axis: point.axis,
                value: point.value,
                seed,
                best_fitness: rec.best_fitness,
                evaluations: rec.generations.last().map_or(0, |g| g.evaluations),
            })
        })
        .collect()
}

/// The first `related` related sources followed by the first
/// `total - related` unrelated ones, in archive order.
pub fn scaling_subset(archive: &SourceArchive, total: usize, related: usize) -> Result<SourceArchive> {
    if total < related {
        return Err(Error::Config(format!(
            "total {total} is smaller than the related count {related}"
        )));
    }
    let flags = archive.related_flags();
    let rel: Vec<usize> = (0..flags.len()).filter(|&i| flags[i]).take(related).collect();
    let unrel: Vec<usize> = (0..flags.len())
        .filter(|&i| !flags[i])
        .take(total - related)
        .collect();
    if rel.len() < related || unrel.len() < total - related {
        return Err(Error::Config(format!(
            "archive has {} related and {} unrelated sources; {total} with {related} related requested",
            flags.iter().filter(|f| **f).count(),
            flags.iter().filter(|f| !**f).count()
        )));
    }
    archive.select(&[rel, unrel].concat())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub total_sources: usize,
    pub algorithm: String,
    pub seed: u64,
    pub transfer_step: u32,
    pub step_ms: f64,
}

pub const TIMING_HEADER: [&str; 5] = ["total_sources", "algorithm", "seed", "transfer_step", "step_ms"];

impl TimingRow {
    pub fn fields(&self) -> Vec<String> {
        vec![
            self.total_sources.to_string(),
            self.algorithm.clone(),
            self.seed.to_string(),
            self.transfer_step.to_string(),
            self.step_ms.to_string(),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct ScalingResult {
    pub timings: Vec<TimingRow>,
    /// Run records per archive size, in `totals` order.
    pub traces: Vec<(usize, Vec<RunRecord>)>,
}

impl ScalingResult {
    /// Mean per-step time for one algorithm at one archive size.
    pub fn mean_step_ms(&self, total: usize, algorithm: &str) -> Option<f64> {
        let steps: Vec<f64> = self
            .timings
            .iter()
            .filter(|t| t.total_sources == total && t.algorithm == algorithm)
            .map(|t| t.step_ms)
            .collect();
        (!steps.is_empty()).then(|| steps.iter().sum::<f64>() / steps.len() as f64)
    }
}

/// Runs each scaling algorithm on growing archive prefixes.
pub fn bench_scaling(
    task: &dyn Task,
    archive: &SourceArchive,
    ea: &EaConfig,
    scaling: &ScalingConfig,
    seeds: &[u64],
) -> Result<ScalingResult> {
    let mut timings = Vec::new();
    let mut traces = Vec::new();
    for &total in &scaling.totals {
        let subset = scaling_subset(archive, total, scaling.related)?;
        let records = run_matrix(task, subset.models(), ea, &scaling.algorithms, seeds)?;
        for r in &records {
            for t in &r.transfers {
                timings.push(TimingRow {
                    total_sources: total,
                    algorithm: r.algorithm.clone(),
                    seed: r.seed,
                    transfer_step: t.step,
                    step_ms: t.step_ms,
                });
            }
        }
        traces.push((total, records));
    }
    Ok(ScalingResult { timings, traces })
}
