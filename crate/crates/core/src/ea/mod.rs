//! Host genetic algorithm with periodic transfer generations.
//!
//! Generation 0 is the random initial population. Each later generation `i`
//! produces `n` offspring, either by crossover and mutation or, when
//! `i % Δ == 0 && i > 1`, from a [`TransferLearner`]. Parents and offspring
//! then compete in elitist selection. The loop stops once the evaluation
//! budget is spent.

pub mod operators;

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::{AmteaLearner, MabLearner};
use crate::error::{Error, Result};
use crate::io::config::canonical_hash;
use crate::models::SearchModel;
use crate::rng::{RngHandle, StreamRng};
use crate::similarity::{init_state, similarity_step, HyperParams, TransferState};
use crate::types::{evaluate, Genotype, Population, Space, Task, WriteBack};
use crate::baselines::em::EmConfig;

use operators::{
    bitflip_mutation, elitist_select, polynomial_mutation, sbx_crossover, uniform_crossover,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum TransferMode {
    #[serde(rename = "cga", alias = "none")]
    None,
    #[default]
    #[serde(rename = "streo")]
    Streo,
    #[serde(rename = "amtea")]
    Amtea,
    #[serde(rename = "mab-amtea")]
    MabAmtea,
}

impl TransferMode {
    pub const ALL: [TransferMode; 4] = [
        TransferMode::None,
        TransferMode::Streo,
        TransferMode::Amtea,
        TransferMode::MabAmtea,
    ];

    /// Name used in output files.
    pub fn algorithm_name(self) -> &'static str {
        match self {
            TransferMode::None => "cga",
            TransferMode::Streo => "streo",
            TransferMode::Amtea => "amtea",
            TransferMode::MabAmtea => "mab-amtea",
        }
    }
}

impl std::str::FromStr for TransferMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cga" | "none" => Ok(TransferMode::None),
            "streo" => Ok(TransferMode::Streo),
            "amtea" => Ok(TransferMode::Amtea),
            "mab-amtea" => Ok(TransferMode::MabAmtea),
            other => Err(Error::Config(format!(
                "unknown algorithm {other:?} (expected cga, streo, amtea or mab-amtea)"
            ))),
        }
    }
}

impl std::fmt::Display for TransferMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.algorithm_name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EaConfig {
    pub population_size: usize,
    pub max_evaluations: u64,
    pub crossover_rate: f64,
    /// Per-locus mutation probability; `None` means `1/d`.
    pub mutation_rate: Option<f64>,
    pub sbx_index: f64,
    pub mutation_index: f64,
    pub transfer: TransferMode,
    pub hyper: HyperParams,
    /// Write repaired genotypes back into the population.
    pub lamarckian: bool,
    pub em: EmConfig,
    pub exp3_gamma: f64,
}

impl Default for EaConfig {
    fn default() -> Self {
        EaConfig {
            population_size: 50,
            max_evaluations: 5000,
            crossover_rate: 1.0,
            mutation_rate: None,
            sbx_index: 10.0,
            mutation_index: 10.0,
            transfer: TransferMode::default(),
            hyper: HyperParams::default(),
            lamarckian: true,
            em: EmConfig::default(),
            exp3_gamma: 0.1,
        }
    }
}

impl EaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::Config("population size must be at least 2".into()));
        }
        if self.max_evaluations < self.population_size as u64 {
            return Err(Error::Config(format!(
                "evaluation budget {} cannot fill a population of {}",
                self.max_evaluations, self.population_size
            )));
        }
        let rate_ok = |r: f64| (0.0..=1.0).contains(&r);
        if !rate_ok(self.crossover_rate) {
            return Err(Error::Config(format!("crossover rate {} outside [0, 1]", self.crossover_rate)));
        }
        if let Some(r) = self.mutation_rate {
            if !rate_ok(r) {
                return Err(Error::Config(format!("mutation rate {r} outside [0, 1]")));
            }
        }
        if !(self.sbx_index > 0.0 && self.mutation_index > 0.0) {
            return Err(Error::Config("distribution indices must be > 0".into()));
        }
        if !(self.exp3_gamma > 0.0 && self.exp3_gamma <= 1.0) {
            return Err(Error::Config(format!("EXP3 gamma {} outside (0, 1]", self.exp3_gamma)));
        }
        self.hyper.validate()?;
        self.em.validate()
    }

    pub fn write_back(&self) -> WriteBack {
        WriteBack::from_flag(self.lamarckian)
    }

    fn mutation_rate_for(&self, dim: usize) -> f64 {
        self.mutation_rate.unwrap_or(1.0 / dim.max(1) as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: u32,
    /// Cumulative objective calls.
    pub evaluations: u64,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    /// Milliseconds since the run started.
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferSnapshot {
    pub step: u32,
    pub generation: u32,
    /// Mixture coefficients used after this step, target slot last.
    pub weights: Vec<f64>,
    /// Whether the learner's proposal was kept; `None` when not applicable.
    pub accepted: Option<bool>,
    pub batch_mean: f64,
    pub step_ms: f64,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub algorithm: String,
    pub seed: u64,
    pub config_hash: String,
    pub generations: Vec<GenerationStats>,
    pub transfers: Vec<TransferSnapshot>,
    pub best_genotype: Genotype,
    pub best_fitness: f64,
    /// Solutions drawn from source models over the whole run.
    pub source_samples: u64,
    pub final_population: Population,
}

impl RunRecord {
    /// Evaluations spent when the best fitness first reached `threshold`.
    pub fn evaluations_to_reach(&self, threshold: f64) -> Option<u64> {
        self.generations
            .iter()
            .find(|g| g.best_fitness >= threshold)
            .map(|g| g.evaluations)
    }

    /// Best fitness among generations with at most `evaluations` spent.
    pub fn best_at(&self, evaluations: u64) -> Option<f64> {
        self.generations
            .iter()
            .take_while(|g| g.evaluations <= evaluations)
            .last()
            .map(|g| g.best_fitness)
    }

    pub fn mean_step_ms(&self) -> Option<f64> {
        if self.transfers.is_empty() {
            return None;
        }
        Some(self.transfers.iter().map(|t| t.step_ms).sum::<f64>() / self.transfers.len() as f64)
    }
}

/// What the host hands a learner on a transfer generation.
pub struct TransferContext<'a> {
    pub task: &'a dyn Task,
    pub target_pop: &'a Population,
    pub target_mean: f64,
    pub n: usize,
    pub write_back: WriteBack,
}

/// Evaluated transfer offspring.
#[derive(Debug, Clone)]
pub struct TransferOutcome {
    pub population: Population,
    /// Mixture component of each solution; the target model is the last index.
    pub provenance: Vec<usize>,
    pub weights: Vec<f64>,
    pub accepted: Option<bool>,
}

/// A strategy that produces transfer offspring.
pub trait TransferLearner {
    /// Mixture size: source count plus one.
    fn models(&self) -> usize;

    fn step(&mut self, ctx: &TransferContext<'_>, rng: &mut StreamRng) -> Result<TransferOutcome>;
}

/// The (1+1)-ES similarity learner.
pub struct StreoLearner<'a> {
    sources: &'a [SearchModel],
    state: TransferState,
    hyper: HyperParams,
}

impl<'a> StreoLearner<'a> {
    pub fn new(sources: &'a [SearchModel], task: &dyn Task, hyper: HyperParams) -> Result<Self> {
        let state = init_state(sources.len() + 1, task, &hyper)?;
        Ok(StreoLearner {
            sources,
            state,
            hyper,
        })
    }

    pub fn state(&self) -> &TransferState {
        &self.state
    }
}

impl TransferLearner for StreoLearner<'_> {
    fn models(&self) -> usize {
        self.sources.len() + 1
    }

    fn step(&mut self, ctx: &TransferContext<'_>, rng: &mut StreamRng) -> Result<TransferOutcome> {
        let out = similarity_step(
            &mut self.state,
            self.sources,
            ctx.target_pop,
            ctx.target_mean,
            ctx.task,
            ctx.n,
            &self.hyper,
            ctx.write_back,
            rng,
        )?;
        Ok(TransferOutcome {
            population: out.population,
            provenance: out.provenance,
            weights: self.state.weights.clone(),
            accepted: out.accepted,
        })
    }
}

/// Checks that every source lives in the task's search space.
pub fn check_sources(task: &dyn Task, sources: &[SearchModel]) -> Result<()> {
    let space = task.space();
    for s in sources {
        if s.representation() != space.representation() {
            return Err(Error::Representation(format!(
                "{} source model for a {} task",
                s.representation(),
                space.representation()
            )));
        }
        if s.dim() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: s.dim(),
            });
        }
    }
    Ok(())
}

/// Runs the algorithm selected by `cfg.transfer` on `task`.
pub fn run(task: &dyn Task, sources: &[SearchModel], cfg: &EaConfig, rng: &RngHandle) -> Result<RunRecord> {
    cfg.validate()?;
    if cfg.transfer != TransferMode::None && sources.is_empty() {
        return Err(Error::Config(format!(
            "{} needs a non-empty source archive",
            cfg.transfer
        )));
    }
    check_sources(task, sources)?;
    match cfg.transfer {
        TransferMode::None => run_with(task, None, cfg, rng),
        TransferMode::Streo => {
            let mut learner = StreoLearner::new(sources, task, cfg.hyper)?;
            run_with(task, Some(&mut learner), cfg, rng)
        }
        TransferMode::Amtea => {
            let mut learner = AmteaLearner::new(sources, cfg.em);
            run_with(task, Some(&mut learner), cfg, rng)
        }
        TransferMode::MabAmtea => {
            let mut learner = MabLearner::new(sources, cfg.em, cfg.exp3_gamma)?;
            run_with(task, Some(&mut learner), cfg, rng)
        }
    }
}

/// The host loop with an explicit learner (`None` runs a plain GA).
pub fn run_with(
    task: &dyn Task,
    mut learner: Option<&mut dyn TransferLearner>,
    cfg: &EaConfig,
    rng: &RngHandle,
) -> Result<RunRecord> {
    cfg.validate()?;
    let started = Instant::now();
    let elapsed_ms = || started.elapsed().as_secs_f64() * 1e3;
    let n = cfg.population_size;
    let write_back = cfg.write_back();
    let space = task.space();
    let mutation_rate = cfg.mutation_rate_for(space.dim());
    let interval = cfg.hyper.transfer_interval;
    let mut init_rng = rng.child("init").rng();
    let mut reproduce_rng = rng.child("reproduce").rng();
    let mut transfer_rng = rng.child("transfer").rng();
    let models = learner.as_ref().map_or(1, |l| l.models());

    let initial: Vec<Genotype> = (0..n).map(|_| random_genotype(space, &mut init_rng)).collect();
    let mut pop = evaluate(task, initial, write_back)?;
    let mut evaluations = pop.evaluations;
    let mut generations = vec![stats(0, evaluations, &pop, elapsed_ms())];
    let mut transfers = Vec::new();
    let mut source_samples = 0u64;

    let mut i: u32 = 1;
    while evaluations < cfg.max_evaluations {
        let transfer_now = i.is_multiple_of(interval) && i > 1;
        let offspring = match (&mut learner, transfer_now) {
            (Some(l), true) => {
                let t0 = Instant::now();
                let ctx = TransferContext {
                    task,
                    target_pop: &pop,
                    target_mean: pop.mean_fitness(),
                    n,
                    write_back,
                };
                let out = l.step(&ctx, &mut transfer_rng)?;
                let step_ms = t0.elapsed().as_secs_f64() * 1e3;
                let target = models - 1;
                source_samples += out.provenance.iter().filter(|&&p| p < target).count() as u64;
                transfers.push(TransferSnapshot {
                    step: transfers.len() as u32,
                    generation: i,
                    weights: out.weights,
                    accepted: out.accepted,
                    batch_mean: out.population.mean_fitness(),
                    step_ms,
                });
                out.population
            }
            _ => {
                let children = reproduce(&pop, space, cfg, mutation_rate, &mut reproduce_rng);
                evaluate(task, children, write_back)?
            }
        };
        evaluations += offspring.evaluations;
        pop = elitist_select(pop, offspring, n);
        pop.evaluations = evaluations;
        generations.push(stats(i, evaluations, &pop, elapsed_ms()));
        i += 1;
    }

    let best = pop.best_index().expect("population is never empty");
    Ok(RunRecord {
        algorithm: cfg.transfer.algorithm_name().to_string(),
        seed: rng.seed(),
        config_hash: canonical_hash(&(cfg, task.describe(), models - 1))?,
        generations,
        transfers,
        best_genotype: pop.genotypes[best].clone(),
        best_fitness: pop.fitness[best],
        source_samples,
        final_population: pop,
    })
}

fn stats(generation: u32, evaluations: u64, pop: &Population, wall_ms: f64) -> GenerationStats {
    GenerationStats {
        generation,
        evaluations,
        best_fitness: pop.best_fitness(),
        mean_fitness: pop.mean_fitness(),
        wall_ms,
    }
}

/// Uniform random genotype in `space`.
pub fn random_genotype<R: Rng + ?Sized>(space: &Space, rng: &mut R) -> Genotype {
    match space {
        Space::Binary { dim } => Genotype::Binary((0..*dim).map(|_| rng.random()).collect()),
        Space::Real { bounds } => Genotype::Real(
            bounds
                .lower()
                .iter()
                .zip(bounds.upper())
                .map(|(lo, hi)| lo + rng.random::<f64>() * (hi - lo))
                .collect(),
        ),
    }
}

/// `n` children from randomly paired parents.
fn reproduce<R: Rng + ?Sized>(
    pop: &Population,
    space: &Space,
    cfg: &EaConfig,
    mutation_rate: f64,
    rng: &mut R,
) -> Vec<Genotype> {
    let n = pop.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut children = Vec::with_capacity(n);
    let mut k = 0;
    while children.len() < n {
        let a = &pop.genotypes[order[k % n]];
        let b = &pop.genotypes[order[(k + 1) % n]];
        k += 2;
        let (c1, c2) = match (a, b, space) {
            (Genotype::Binary(a), Genotype::Binary(b), _) => {
                let (mut c1, mut c2) = uniform_crossover(a, b, cfg.crossover_rate, rng);
                bitflip_mutation(&mut c1, mutation_rate, rng);
                bitflip_mutation(&mut c2, mutation_rate, rng);
                (Genotype::Binary(c1), Genotype::Binary(c2))
            }
            (Genotype::Real(a), Genotype::Real(b), Space::Real { bounds }) => {
                let (mut c1, mut c2) = sbx_crossover(a, b, cfg.sbx_index, cfg.crossover_rate, bounds, rng);
                polynomial_mutation(&mut c1, cfg.mutation_index, mutation_rate, bounds, rng);
                polynomial_mutation(&mut c2, cfg.mutation_index, mutation_rate, bounds, rng);
                (Genotype::Real(c1), Genotype::Real(c2))
            }
            _ => unreachable!("population genotypes were checked against the space"),
        };
        children.push(c1);
        if children.len() < n {
            children.push(c2);
        }
    }
    children
}
