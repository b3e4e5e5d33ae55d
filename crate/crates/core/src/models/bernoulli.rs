use rand::Rng;

use crate::error::{Error, Result};
use crate::types::{Genotype, Population};

/// Factored Bernoulli (univariate marginal frequency) distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliModel {
    p: Vec<f64>,
    ln_p: Vec<f64>,
    ln_q: Vec<f64>,
}

impl BernoulliModel {
    /// Builds a model from explicit marginals, each strictly inside (0, 1).
    pub fn from_probs(p: Vec<f64>) -> Result<Self> {
        if let Some(bad) = p.iter().find(|v| !(v.is_finite() && **v > 0.0 && **v < 1.0)) {
            return Err(Error::InvalidInput(format!(
                "Bernoulli marginal {bad} outside (0, 1)"
            )));
        }
        let ln_p = p.iter().map(|v| v.ln()).collect();
        let ln_q = p.iter().map(|v| (1.0 - v).ln()).collect();
        Ok(BernoulliModel { p, ln_p, ln_q })
    }

    /// Marginal frequencies of `pop`, clamped to `[1/(2n), 1 - 1/(2n)]`.
    pub fn fit(pop: &Population) -> Result<Self> {
        let n = pop.len();
        let first = pop
            .genotypes
            .first()
            .ok_or_else(|| Error::InvalidInput("cannot fit a model to an empty population".into()))?;
        let dim = first.len();
        let mut ones = vec![0usize; dim];
        for g in &pop.genotypes {
            let bits = g
                .as_binary()
                .ok_or_else(|| Error::Representation("Bernoulli fit needs binary genotypes".into()))?;
            if bits.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: bits.len(),
                });
            }
            for (c, &b) in ones.iter_mut().zip(bits) {
                *c += usize::from(b);
            }
        }
        let p_min = 1.0 / (2.0 * n as f64);
        let p = ones
            .into_iter()
            .map(|c| (c as f64 / n as f64).clamp(p_min, 1.0 - p_min))
            .collect();
        BernoulliModel::from_probs(p)
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Genotype {
        Genotype::Binary(self.p.iter().map(|&p| rng.random::<f64>() < p).collect())
    }

    pub fn log_density(&self, bits: &[bool]) -> f64 {
        bits.iter()
            .zip(self.ln_p.iter().zip(&self.ln_q))
            .map(|(&b, (lp, lq))| if b { *lp } else { *lq })
            .sum()
    }
}
