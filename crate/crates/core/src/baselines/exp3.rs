//! EXP3 adversarial bandit over source models.

use rand::Rng;

use crate::error::{Error, Result};

// weights are rescaled once the largest passes this, leaving probabilities intact
const RESCALE_AT: f64 = 1e100;

#[derive(Debug, Clone, PartialEq)]
pub struct Exp3State {
    weights: Vec<f64>,
    gamma: f64,
    cumulative_reward: Vec<f64>,
    reward_range: Option<(f64, f64)>,
}

impl Exp3State {
    pub fn new(arms: usize, gamma: f64) -> Result<Self> {
        if arms == 0 {
            return Err(Error::InvalidInput("EXP3 needs at least one arm".into()));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::Config(format!("EXP3 gamma {gamma} outside (0, 1]")));
        }
        Ok(Exp3State {
            weights: vec![1.0; arms],
            gamma,
            cumulative_reward: vec![0.0; arms],
            reward_range: None,
        })
    }

    /// Starts from explicit arm weights.
    pub fn with_weights(weights: Vec<f64>, gamma: f64) -> Result<Self> {
        let mut s = Exp3State::new(weights.len(), gamma)?;
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidInput("EXP3 weights must be positive".into()));
        }
        s.weights = weights;
        Ok(s)
    }

    pub fn arms(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cumulative_reward(&self) -> &[f64] {
        &self.cumulative_reward
    }

    /// `p_k = (1 − γ) w_k / Σw + γ / K`.
    pub fn probabilities(&self) -> Vec<f64> {
        let k = self.arms() as f64;
        let total: f64 = self.weights.iter().sum();
        self.weights
            .iter()
            .map(|w| (1.0 - self.gamma) * w / total + self.gamma / k)
            .collect()
    }

    /// Draws an arm. A single arm is returned without consuming randomness.
    pub fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if self.arms() == 1 {
            return 0;
        }
        let probs = self.probabilities();
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        probs.len() - 1
    }

    /// Importance-weighted update of the pulled arm. Rewards outside `[0, 1]`
    /// are clipped.
    pub fn update(&mut self, arm: usize, reward: f64) {
        let r = if (0.0..=1.0).contains(&reward) {
            reward
        } else {
            log::warn!("EXP3 reward {reward} clipped to [0, 1]");
            reward.clamp(0.0, 1.0)
        };
        let p = self.probabilities()[arm];
        let k = self.arms() as f64;
        self.weights[arm] *= (self.gamma * (r / p) / k).exp();
        self.cumulative_reward[arm] += r;
        let top = self.weights.iter().copied().fold(0.0, f64::max);
        if top > RESCALE_AT {
            self.weights.iter_mut().for_each(|w| *w /= top);
        }
    }

    /// Maps a batch mean fitness into `[0, 1]` by the running min and max of
    /// every value seen so far (this one included). Returns 0.5 while the
    /// range is empty.
    pub fn normalize_reward(&mut self, mean_fitness: f64) -> f64 {
        let (lo, hi) = match self.reward_range {
            None => (mean_fitness, mean_fitness),
            Some((lo, hi)) => (lo.min(mean_fitness), hi.max(mean_fitness)),
        };
        self.reward_range = Some((lo, hi));
        if hi > lo {
            (mean_fitness - lo) / (hi - lo)
        } else {
            0.5
        }
    }
}
