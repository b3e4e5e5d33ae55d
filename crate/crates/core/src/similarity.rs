//! Source–target similarity learning with a (1+1) evolution strategy.
//!
//! The individual is the vector of mixture coefficients `w` over `T` models:
//! `T - 1` frozen source models followed by the target model, which is refit
//! from the current target population on every call. Its fitness is the mean
//! target fitness of the solutions sampled from the mixture it defines.
//!
//! Mutation does not draw a random perturbation. Instead each model keeps a
//! running mean of the target fitness of every solution it has contributed
//! (the *mutation vector*). That vector is shifted to be non-negative,
//! max-abs scaled, pushed through a tempered softmax and blended into the
//! parent with a learning rate. Coefficients at or below `ε = c / T` are
//! neutralized, and a source once neutralized stays at zero in every
//! descendant. The target slot is exempt from that memory since its model
//! changes every step.
//!
//! Apart from sampling and evaluating the `n` solutions, a step costs
//! `O(n + T)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{normalize, sample_mixture, shrink_support, MixtureModel, SearchModel};
use crate::types::{evaluate, Population, Sense, Task, WriteBack};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HyperParams {
    /// Softmax temperature `λ`.
    pub temperature: f64,
    /// Blend rate `η` between parent and softmax output.
    pub learning_rate: f64,
    /// Neutralization coefficient `c`; the threshold is `c / T`.
    pub neutralization: f64,
    /// Generations between transfer steps `Δ`.
    pub transfer_interval: u32,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            temperature: 0.01,
            learning_rate: 0.9,
            neutralization: 1e-2,
            transfer_interval: 2,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::Config(format!("temperature {} must be > 0", self.temperature)));
        }
        if !(0.0..=1.0).contains(&self.learning_rate) {
            return Err(Error::Config(format!(
                "learning rate {} outside [0, 1]",
                self.learning_rate
            )));
        }
        if !(self.neutralization > 0.0 && self.neutralization.is_finite()) {
            return Err(Error::Config(format!(
                "neutralization coefficient {} must be > 0",
                self.neutralization
            )));
        }
        if self.transfer_interval < 1 {
            return Err(Error::Config("transfer interval must be >= 1".into()));
        }
        Ok(())
    }

    /// Neutralization threshold for `models` mixture components.
    pub fn threshold(&self, models: usize) -> f64 {
        self.neutralization / models as f64
    }
}

/// Running mean target fitness per model.
#[derive(Debug, Clone, PartialEq)]
pub struct MutationVector {
    pub values: Vec<f64>,
    /// Samples folded into each source entry. The last (target) slot is
    /// overwritten every step and never counted.
    pub counts: Vec<u64>,
    pub init_value: f64,
}

impl MutationVector {
    pub fn new(models: usize, init_value: f64) -> Self {
        MutationVector {
            values: vec![init_value; models],
            counts: vec![0; models],
            init_value,
        }
    }

    /// Folds one fitness value into slot `s`: `π ← π + (f − π) / k`.
    #[inline]
    pub fn push(&mut self, s: usize, fitness: f64) {
        self.counts[s] += 1;
        let k = self.counts[s] as f64;
        self.values[s] += (fitness - self.values[s]) / k;
    }
}

/// The (1+1)-ES individual plus the bookkeeping that travels with it.
#[derive(Debug, Clone)]
pub struct TransferState {
    /// Parent coefficients, target slot last.
    pub weights: Vec<f64>,
    pub mutation: MutationVector,
    /// Mean fitness of the incumbent's sample.
    pub incumbent: f64,
    /// Transfer counter `t`.
    pub step: u64,
    /// `(component, fitness)` pairs from the previous step, folded into the
    /// mutation vector at the start of the next one.
    pending: Vec<(usize, f64)>,
}

impl TransferState {
    pub fn models(&self) -> usize {
        self.weights.len()
    }

    pub fn target_slot(&self) -> usize {
        self.weights.len() - 1
    }
}

/// Output of one [`similarity_step`].
#[derive(Debug, Clone)]
pub struct StepOutcome {
    /// The evaluated transfer solutions `X_t`.
    pub population: Population,
    /// Component index of each solution in `population`.
    pub provenance: Vec<usize>,
    /// Whether the offspring replaced the parent (`None` on the first step).
    pub accepted: Option<bool>,
    /// Components zeroed to fit the sample budget.
    pub dropped: usize,
}

/// Uniform coefficients over `models` components, mutation vector at the
/// task's initial value (0 when maximizing, the fitness lower bound when
/// minimizing).
pub fn init_state(models: usize, task: &dyn Task, hp: &HyperParams) -> Result<TransferState> {
    hp.validate()?;
    if models < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least one source model besides the target, got {models} model(s)"
        )));
    }
    let init_value = match task.sense() {
        Sense::Maximize => 0.0,
        Sense::Minimize => task.fitness_lower_bound().ok_or_else(|| {
            Error::InvalidInput(format!(
                "minimization task {} has no fitness lower bound",
                task.describe()
            ))
        })?,
    };
    Ok(TransferState {
        weights: vec![1.0 / models as f64; models],
        mutation: MutationVector::new(models, init_value),
        incumbent: f64::NEG_INFINITY,
        step: 0,
        pending: Vec::new(),
    })
}

/// Folds source samples into the running means, in arrival order, then sets
/// the target slot to `target_mean`.
pub fn update_running_means(state: &mut TransferState, samples: &[(usize, f64)], target_mean: f64) {
    let target = state.target_slot();
    for &(s, f) in samples {
        if s < target {
            state.mutation.push(s, f);
        }
    }
    state.mutation.values[target] = target_mean;
}

/// Shift to non-negative, max-abs scale, then tempered softmax.
pub fn transfer_probabilities(values: &[f64], temperature: f64) -> Vec<f64> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = if min < 0.0 { -min } else { 0.0 };
    let max = values.iter().map(|v| v + shift).fold(0.0, f64::max);
    let scaled: Vec<f64> = if max > 0.0 {
        values.iter().map(|v| (v + shift) / max).collect()
    } else {
        vec![0.0; values.len()]
    };
    let top = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = scaled.iter().map(|v| ((v - top) / temperature).exp()).collect();
    let z: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= z);
    out
}

/// Produces the offspring coefficients `w''` from the parent and the mutation
/// vector.
pub fn mutate_coefficients(state: &TransferState, hp: &HyperParams) -> Vec<f64> {
    let probs = transfer_probabilities(&state.mutation.values, hp.temperature);
    let eta = hp.learning_rate;
    let blended: Vec<f64> = state
        .weights
        .iter()
        .zip(&probs)
        .map(|(&parent, &p)| (1.0 - eta) * parent + eta * p)
        .collect();
    neutralize(blended, &state.weights, hp.threshold(state.models()))
}

/// Zeroes entries `<= eps` and source entries whose parent is already zero,
/// then renormalizes. When nothing survives the target slot (last) takes
/// all the mass.
pub fn neutralize(mut w: Vec<f64>, parent: &[f64], eps: f64) -> Vec<f64> {
    let target = w.len() - 1;
    for (i, v) in w.iter_mut().enumerate() {
        if *v <= eps || (i != target && parent[i] == 0.0) {
            *v = 0.0;
        }
    }
    if normalize(&mut w).is_none() {
        log::debug!("every coefficient neutralized; falling back to the target model");
        w.iter_mut().for_each(|v| *v = 0.0);
        w[target] = 1.0;
    }
    w
}

/// One generation of the (1+1)-ES.
///
/// On the first call (`t = 0`) the uniform parent is sampled and scored. On
/// later calls the previous step's samples update the mutation vector, an
/// offspring is mutated, sampled and scored, and it replaces the parent when
/// its mean fitness is at least the incumbent's. The sampled solutions are
/// returned either way.
#[allow(clippy::too_many_arguments)]
pub fn similarity_step<R: Rng + ?Sized>(
    state: &mut TransferState,
    sources: &[SearchModel],
    target_pop: &Population,
    target_mean: f64,
    task: &dyn Task,
    n: usize,
    hp: &HyperParams,
    write_back: WriteBack,
    rng: &mut R,
) -> Result<StepOutcome> {
    let models = state.models();
    if sources.len() + 1 != models {
        return Err(Error::DimensionMismatch {
            expected: models - 1,
            found: sources.len(),
        });
    }
    let target = models - 1;
    let first = state.step == 0;
    let mut candidate = if first {
        state.weights.clone()
    } else {
        let pending = std::mem::take(&mut state.pending);
        update_running_means(state, &pending, target_mean);
        mutate_coefficients(state, hp)
    };
    let dropped = shrink_support(&mut candidate, n, Some(target), rng)?;
    if dropped > 0 {
        log::info!("transfer step {}: dropped {dropped} components for a budget of {n}", state.step);
    }

    let target_model = SearchModel::fit(target_pop, task.space())?;
    let mut components: Vec<&SearchModel> = sources.iter().collect();
    components.push(&target_model);
    let mixture =
        MixtureModel::new(components, candidate.clone())?.with_bounds(task.space().bounds().cloned());
    let (genotypes, provenance) = sample_mixture(&mixture, n, rng)?;
    let population = evaluate(task, genotypes, write_back)?;
    let mean = population.mean_fitness();

    state.pending = provenance
        .iter()
        .zip(&population.fitness)
        .filter(|(s, _)| **s < target)
        .map(|(s, f)| (*s, *f))
        .collect();

    let accepted = if first {
        state.weights = candidate;
        state.incumbent = mean;
        None
    } else if mean >= state.incumbent {
        state.weights = candidate;
        state.incumbent = mean;
        Some(true)
    } else {
        Some(false)
    };
    state.step += 1;
    Ok(StepOutcome {
        population,
        provenance,
        accepted,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::BernoulliModel;
    use crate::rng::RngHandle;
    use crate::types::test_tasks::{OneMax, Sphere};
    use crate::types::{Genotype, Space};

    fn state_with(values: Vec<f64>, weights: Vec<f64>) -> TransferState {
        let m = values.len();
        TransferState {
            weights,
            mutation: MutationVector {
                values,
                counts: vec![0; m],
                init_value: 0.0,
            },
            incumbent: 0.0,
            step: 1,
            pending: vec![],
        }
    }

    #[test]
    fn init_uniform_maximize() {
        let s = init_state(4, &OneMax::new(3), &HyperParams::default()).unwrap();
        assert_eq!(s.weights, vec![0.25; 4]);
        assert_eq!(s.mutation.values, vec![0.0; 4]);
        assert_eq!(s.step, 0);
        let s = init_state(1001, &OneMax::new(3), &HyperParams::default()).unwrap();
        assert!(s.weights.iter().all(|w| *w == 1.0 / 1001.0));
    }

    #[test]
    fn init_minimize_uses_lower_bound() {
        let s = init_state(3, &Sphere::new(2), &HyperParams::default()).unwrap();
        assert_eq!(s.mutation.values, vec![-2.0; 3]);
    }

    #[test]
    fn init_needs_a_source() {
        assert!(init_state(1, &OneMax::new(3), &HyperParams::default()).is_err());
    }

    #[test]
    fn running_mean_examples() {
        let mut s = state_with(vec![4.0, 0.0, 0.0], vec![1.0 / 3.0; 3]);
        s.mutation.counts[0] = 1;
        update_running_means(&mut s, &[(0, 8.0), (1, 5.0)], 2.5);
        assert_eq!(s.mutation.values, vec![6.0, 5.0, 2.5]);
        assert_eq!(s.mutation.counts, vec![2, 1, 0]);
    }

    #[test]
    fn target_samples_do_not_count() {
        let mut s = state_with(vec![0.0; 3], vec![1.0 / 3.0; 3]);
        update_running_means(&mut s, &[(2, 100.0)], 1.0);
        assert_eq!(s.mutation.counts[2], 0);
        assert_eq!(s.mutation.values[2], 1.0);
    }

    #[test]
    fn mutation_example() {
        let s = state_with(vec![10.0, 0.0, 5.0], vec![1.0 / 3.0; 3]);
        let w = mutate_coefficients(&s, &HyperParams::default());
        // high-precision evaluation of (0.1/3 + 0.9 * softmax) / sum
        let expected = [0.933_333_333_333_333_3, 0.033_333_333_333_333_33, 0.033_333_333_333_333_33];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{w:?}");
        }
    }

    #[test]
    fn equal_values_keep_uniform_parent() {
        let s = state_with(vec![3.0; 4], vec![0.25; 4]);
        let w = mutate_coefficients(&s, &HyperParams::default());
        for v in w {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn small_entries_neutralized() {
        let w = neutralize(vec![0.999, 0.0005, 0.0005], &[1.0 / 3.0; 3], 1e-2 / 3.0);
        assert_eq!(w, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_parent_stays_zero_but_target_recovers() {
        let s = state_with(vec![10.0, 10.0, 10.0], vec![0.0, 0.0, 1.0]);
        let w = mutate_coefficients(&s, &HyperParams::default());
        assert_eq!(w, vec![0.0, 0.0, 1.0]);
        let s = state_with(vec![10.0, 10.0, 10.0], vec![0.5, 0.5, 0.0]);
        let w = mutate_coefficients(&s, &HyperParams::default());
        assert!(w[2] > 0.0);
    }

    #[test]
    fn all_neutralized_falls_back_to_target() {
        let hp = HyperParams {
            learning_rate: 0.0,
            ..HyperParams::default()
        };
        let s = state_with(vec![1.0, 2.0, 3.0], vec![0.001, 0.001, 0.0]);
        let w = mutate_coefficients(&s, &hp);
        assert_eq!(w, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn negative_values_are_shifted() {
        let p = transfer_probabilities(&[-2.0, -1.0, -1.5], 0.01);
        assert!(p[1] > 0.999);
        let all_zero = transfer_probabilities(&[0.0, 0.0], 0.01);
        assert_eq!(all_zero, vec![0.5, 0.5]);
    }

    #[test]
    fn overflow_safe_at_low_temperature() {
        let p = transfer_probabilities(&[1000.0, 999.0, 0.0], 0.001);
        assert!(p.iter().all(|v| v.is_finite()));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    /// Bit 0 decides the score: sources are near-deterministic on it.
    struct FirstBit;

    impl Task for FirstBit {
        fn space(&self) -> &Space {
            static SPACE: Space = Space::Binary { dim: 4 };
            &SPACE
        }
        fn sense(&self) -> Sense {
            Sense::Maximize
        }
        fn objective(&self, g: &Genotype) -> f64 {
            if g.as_binary().unwrap()[0] {
                10.0
            } else {
                1.0
            }
        }
        fn describe(&self) -> String {
            "first-bit".into()
        }
    }

    fn target_population(rng: &mut impl Rng) -> Population {
        let genotypes: Vec<Genotype> = (0..50)
            .map(|_| Genotype::Binary((0..4).map(|_| rng.random::<bool>()).collect()))
            .collect();
        evaluate(&FirstBit, genotypes, WriteBack::Lamarckian).unwrap()
    }

    #[test]
    fn learns_the_good_source() {
        let hi = 1.0 - 1e-12;
        let a = SearchModel::Bernoulli(BernoulliModel::from_probs(vec![hi, 0.5, 0.5, 0.5]).unwrap());
        let b = SearchModel::Bernoulli(BernoulliModel::from_probs(vec![1e-12, 0.5, 0.5, 0.5]).unwrap());
        let sources = vec![a, b];
        let hp = HyperParams::default();
        let mut state = init_state(3, &FirstBit, &hp).unwrap();
        let mut rng = RngHandle::new(9).rng();
        let first = {
            let pop = target_population(&mut rng);
            let mean = pop.mean_fitness();
            similarity_step(&mut state, &sources, &pop, mean, &FirstBit, 50, &hp, WriteBack::Lamarckian, &mut rng)
                .unwrap()
        };
        let mut per = [0usize; 3];
        first.provenance.iter().for_each(|&p| per[p] += 1);
        assert!(per.iter().all(|&c| c >= 1));
        assert_eq!(per.iter().sum::<usize>(), 50);
        for _ in 0..3 {
            let pop = target_population(&mut rng);
            let mean = pop.mean_fitness();
            similarity_step(&mut state, &sources, &pop, mean, &FirstBit, 50, &hp, WriteBack::Lamarckian, &mut rng)
                .unwrap();
        }
        assert!(state.weights[0] > 0.8, "{:?}", state.weights);
        assert_eq!(state.weights[1], 0.0);
    }

    #[test]
    fn rejected_offspring_keeps_parent() {
        let a = SearchModel::Bernoulli(BernoulliModel::from_probs(vec![0.5; 4]).unwrap());
        let sources = vec![a];
        let hp = HyperParams::default();
        let mut state = init_state(2, &FirstBit, &hp).unwrap();
        let mut rng = RngHandle::new(2).rng();
        let pop = target_population(&mut rng);
        similarity_step(&mut state, &sources, &pop, 5.0, &FirstBit, 50, &hp, WriteBack::Lamarckian, &mut rng)
            .unwrap();
        // an unbeatable incumbent forces rejection
        state.incumbent = 1e9;
        let parent = state.weights.clone();
        let out = similarity_step(&mut state, &sources, &pop, 5.0, &FirstBit, 50, &hp, WriteBack::Lamarckian, &mut rng)
            .unwrap();
        assert_eq!(out.accepted, Some(false));
        assert_eq!(state.weights, parent);
        assert_eq!(state.incumbent, 1e9);
        assert_eq!(out.population.len(), 50);
    }
}
