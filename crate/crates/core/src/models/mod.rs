//! Search distributions, the transfer mixture and its stratified sampler.

mod bernoulli;
mod gaussian;

use rand::seq::SliceRandom;
use rand::Rng;

pub use bernoulli::BernoulliModel;
pub use gaussian::GaussianModel;

use crate::error::{Error, Result};
use crate::types::{Bounds, Genotype, Population, Representation, Space};

/// A fixed probabilistic model over the unified search space.
#[derive(Debug, Clone, PartialEq)]
pub enum SearchModel {
    Bernoulli(BernoulliModel),
    Gaussian(GaussianModel),
}

impl SearchModel {
    pub fn dim(&self) -> usize {
        match self {
            SearchModel::Bernoulli(m) => m.dim(),
            SearchModel::Gaussian(m) => m.dim(),
        }
    }

    pub fn representation(&self) -> Representation {
        match self {
            SearchModel::Bernoulli(_) => Representation::Binary,
            SearchModel::Gaussian(_) => Representation::Real,
        }
    }

    /// Fits the model family matching `space` to `pop`.
    pub fn fit(pop: &Population, space: &Space) -> Result<Self> {
        let model = match space {
            Space::Binary { .. } => SearchModel::Bernoulli(BernoulliModel::fit(pop)?),
            Space::Real { .. } => SearchModel::Gaussian(GaussianModel::fit(pop)?),
        };
        if model.dim() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: model.dim(),
            });
        }
        Ok(model)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, bounds: Option<&Bounds>) -> Genotype {
        match self {
            SearchModel::Bernoulli(m) => m.sample(rng),
            SearchModel::Gaussian(m) => m.sample(rng, bounds),
        }
    }

    pub fn log_density(&self, x: &Genotype) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        match (self, x) {
            (SearchModel::Bernoulli(m), Genotype::Binary(b)) => Ok(m.log_density(b)),
            (SearchModel::Gaussian(m), Genotype::Real(r)) => Ok(m.log_density(r)),
            _ => Err(Error::Representation(format!(
                "{} model cannot score a {} genotype",
                self.representation(),
                x.representation()
            ))),
        }
    }
}

/// Tolerance on `|Σw - 1|` for mixture weights.
pub const SIMPLEX_TOL: f64 = 1e-12;

pub(crate) fn check_simplex(w: &[f64]) -> Result<()> {
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidInput("weights must be finite and non-negative".into()));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidInput(format!("weights sum to {s}, not 1")));
    }
    Ok(())
}

/// Divides by the sum. Returns `None` when the sum is not positive.
pub fn normalize(w: &mut [f64]) -> Option<()> {
    let s: f64 = w.iter().sum();
    if !(s > 0.0 && s.is_finite()) {
        return None;
    }
    w.iter_mut().for_each(|v| *v /= s);
    Some(())
}

/// Convex combination of frozen source models and the current target model.
#[derive(Debug, Clone)]
pub struct MixtureModel<'a> {
    components: Vec<&'a SearchModel>,
    weights: Vec<f64>,
    bounds: Option<Bounds>,
}

impl<'a> MixtureModel<'a> {
    pub fn new(components: Vec<&'a SearchModel>, weights: Vec<f64>) -> Result<Self> {
        if components.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: components.len(),
                found: weights.len(),
            });
        }
        if let Some(first) = components.first() {
            let d = first.dim();
            if let Some(bad) = components.iter().find(|c| c.dim() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: bad.dim(),
                });
            }
        }
        check_simplex(&weights)?;
        Ok(MixtureModel {
            components,
            weights,
            bounds: None,
        })
    }

    /// Box bounds used to clip Gaussian draws.
    pub fn with_bounds(mut self, bounds: Option<Bounds>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[&'a SearchModel] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Deterministic largest-remainder apportionment of `n` samples.
///
/// Every component with positive weight gets one sample up front; the
/// remaining `n - m` are split by quota `w_i (n - m)`, floors first, then one
/// each to the largest fractional parts (lower index wins ties). Zero-weight
/// components get nothing.
pub fn allocate_samples(w: &[f64], n: usize) -> Result<Vec<usize>> {
    let positive: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
    let m = positive.len();
    if n < m {
        return Err(Error::InfeasibleAllocation { n, support: m });
    }
    let mut counts = vec![0usize; w.len()];
    if m == 0 {
        if n == 0 {
            return Ok(counts);
        }
        return Err(Error::InvalidInput("no component has positive weight".into()));
    }
    let total: f64 = positive.iter().map(|&i| w[i]).sum();
    let rest = n - m;
    let mut fractions = Vec::with_capacity(m);
    let mut assigned = 0usize;
    for &i in &positive {
        let quota = w[i] / total * rest as f64;
        let fl = (quota.floor() as usize).min(rest);
        counts[i] = 1 + fl;
        assigned += fl;
        fractions.push((quota - fl as f64, i));
    }
    if assigned > rest {
        // floating-point overshoot; trim from the smallest fractions
        fractions.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
        let mut excess = assigned - rest;
        for &(_, i) in &fractions {
            if excess == 0 {
                break;
            }
            if counts[i] > 1 {
                counts[i] -= 1;
                excess -= 1;
            }
        }
        return Ok(counts);
    }
    let mut leftover = rest - assigned;
    fractions.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    while leftover > 0 {
        for &(_, i) in &fractions {
            if leftover == 0 {
                break;
            }
            counts[i] += 1;
            leftover -= 1;
        }
    }
    Ok(counts)
}

/// Zeroes the smallest positive weights until at most `n` remain, then
/// renormalizes. Ties among equal weights are broken by a random permutation
/// drawn from `rng`. The `protected` slot is never dropped. Returns the number
/// of components dropped.
pub fn shrink_support<R: Rng + ?Sized>(
    w: &mut [f64],
    n: usize,
    protected: Option<usize>,
    rng: &mut R,
) -> Result<usize> {
    let support = w.iter().filter(|v| **v > 0.0).count();
    if support <= n {
        return Ok(0);
    }
    let mut candidates: Vec<usize> = (0..w.len())
        .filter(|&i| w[i] > 0.0 && Some(i) != protected)
        .collect();
    let keep_protected = protected.is_some_and(|p| w.get(p).is_some_and(|v| *v > 0.0));
    let drop = support - n;
    if n == 0 || (keep_protected && n < 1) || candidates.len() < drop {
        return Err(Error::InfeasibleAllocation { n, support });
    }
    candidates.shuffle(rng);
    candidates.sort_by(|&a, &b| w[a].total_cmp(&w[b]));
    for &i in &candidates[..drop] {
        w[i] = 0.0;
    }
    normalize(w).ok_or_else(|| Error::InvalidInput("support shrink emptied the mixture".into()))?;
    log::debug!("dropped {drop} mixture components to fit a budget of {n} samples");
    Ok(drop)
}

/// Draws exactly `n` genotypes, `counts[i]` of them i.i.d. from component `i`.
/// Returns the genotypes and the component index each came from.
pub fn sample_mixture<R: Rng + ?Sized>(
    mix: &MixtureModel<'_>,
    n: usize,
    rng: &mut R,
) -> Result<(Vec<Genotype>, Vec<usize>)> {
    let counts = allocate_samples(&mix.weights, n)?;
    let mut genotypes = Vec::with_capacity(n);
    let mut provenance = Vec::with_capacity(n);
    for (i, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            genotypes.push(mix.components[i].sample(rng, mix.bounds.as_ref()));
            provenance.push(i);
        }
    }
    Ok((genotypes, provenance))
}
