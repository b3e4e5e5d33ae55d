//! Reference transfer strategies: EM-weighted stacking over every source, and
//! a bandit that stacks one source at a time.

pub mod em;
pub mod exp3;

use crate::ea::{run_with, EaConfig, RunRecord, TransferContext, TransferLearner, TransferMode, TransferOutcome};
use crate::error::Result;
use crate::models::{sample_mixture, shrink_support, MixtureModel, SearchModel};
use crate::rng::{RngHandle, StreamRng};
use crate::types::{evaluate, Task};

use em::{em_fit_weights, EmConfig};
use exp3::Exp3State;

/// Fits mixture weights over all sources plus the refit target model by EM on
/// the current population, then samples from that mixture.
pub struct AmteaLearner<'a> {
    sources: &'a [SearchModel],
    em: EmConfig,
}

impl<'a> AmteaLearner<'a> {
    pub fn new(sources: &'a [SearchModel], em: EmConfig) -> Self {
        AmteaLearner { sources, em }
    }
}

impl TransferLearner for AmteaLearner<'_> {
    fn models(&self) -> usize {
        self.sources.len() + 1
    }

    fn step(&mut self, ctx: &TransferContext<'_>, rng: &mut StreamRng) -> Result<TransferOutcome> {
        let target_model = SearchModel::fit(ctx.target_pop, ctx.task.space())?;
        let mut components: Vec<&SearchModel> = self.sources.iter().collect();
        components.push(&target_model);
        let mut weights = em_fit_weights(&components, ctx.target_pop, &self.em)?;
        let target = weights.len() - 1;
        shrink_support(&mut weights, ctx.n, Some(target), rng)?;
        let mixture = MixtureModel::new(components, weights.clone())?
            .with_bounds(ctx.task.space().bounds().cloned());
        let (genotypes, provenance) = sample_mixture(&mixture, ctx.n, rng)?;
        let population = evaluate(ctx.task, genotypes, ctx.write_back)?;
        Ok(TransferOutcome {
            population,
            provenance,
            weights,
            accepted: None,
        })
    }
}

/// Picks one source per step with EXP3 and stacks it with the target model.
pub struct MabLearner<'a> {
    sources: &'a [SearchModel],
    em: EmConfig,
    bandit: Exp3State,
}

impl<'a> MabLearner<'a> {
    pub fn new(sources: &'a [SearchModel], em: EmConfig, gamma: f64) -> Result<Self> {
        Ok(MabLearner {
            sources,
            em,
            bandit: Exp3State::new(sources.len(), gamma)?,
        })
    }

    pub fn bandit(&self) -> &Exp3State {
        &self.bandit
    }
}

impl TransferLearner for MabLearner<'_> {
    fn models(&self) -> usize {
        self.sources.len() + 1
    }

    fn step(&mut self, ctx: &TransferContext<'_>, rng: &mut StreamRng) -> Result<TransferOutcome> {
        let arm = self.bandit.select(rng);
        let target_model = SearchModel::fit(ctx.target_pop, ctx.task.space())?;
        let pair = [&self.sources[arm], &target_model];
        let stacked = em_fit_weights(&pair, ctx.target_pop, &self.em)?;
        let mixture =
            MixtureModel::new(pair.to_vec(), stacked.clone())?.with_bounds(ctx.task.space().bounds().cloned());
        let (genotypes, local) = sample_mixture(&mixture, ctx.n, rng)?;
        let population = evaluate(ctx.task, genotypes, ctx.write_back)?;
        let reward = self.bandit.normalize_reward(population.mean_fitness());
        self.bandit.update(arm, reward);

        let target = self.sources.len();
        let mut weights = vec![0.0; target + 1];
        weights[arm] = stacked[0];
        weights[target] = stacked[1];
        let provenance = local.into_iter().map(|c| if c == 0 { arm } else { target }).collect();
        Ok(TransferOutcome {
            population,
            provenance,
            weights,
            accepted: None,
        })
    }
}

/// Host GA with EM stacking over every source. An empty archive leaves only
/// the target model in the mixture.
pub fn run_amtea(task: &dyn Task, sources: &[SearchModel], cfg: &EaConfig, rng: &RngHandle) -> Result<RunRecord> {
    crate::ea::check_sources(task, sources)?;
    let cfg = EaConfig {
        transfer: TransferMode::Amtea,
        ..cfg.clone()
    };
    let mut learner = AmteaLearner::new(sources, cfg.em);
    run_with(task, Some(&mut learner), &cfg, rng)
}

/// Host GA with EXP3 source selection.
pub fn run_mab_amtea(task: &dyn Task, sources: &[SearchModel], cfg: &EaConfig, rng: &RngHandle) -> Result<RunRecord> {
    crate::ea::check_sources(task, sources)?;
    let cfg = EaConfig {
        transfer: TransferMode::MabAmtea,
        ..cfg.clone()
    };
    let mut learner = MabLearner::new(sources, cfg.em, cfg.exp3_gamma)?;
    run_with(task, Some(&mut learner), &cfg, rng)
}
