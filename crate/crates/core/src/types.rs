//! Genotypes, tasks and evaluated populations.
//!
//! All fitness values stored in a [`Population`] are maximization-oriented:
//! tasks that minimize have their objective negated exactly once, inside
//! [`evaluate`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Genotype {
    Binary(Vec<bool>),
    Real(Vec<f64>),
}

impl Genotype {
    pub fn len(&self) -> usize {
        match self {
            Genotype::Binary(b) => b.len(),
            Genotype::Real(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_binary(&self) -> Option<&[bool]> {
        match self {
            Genotype::Binary(b) => Some(b),
            Genotype::Real(_) => None,
        }
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            Genotype::Real(r) => Some(r),
            Genotype::Binary(_) => None,
        }
    }

    pub fn representation(&self) -> Representation {
        match self {
            Genotype::Binary(_) => Representation::Binary,
            Genotype::Real(_) => Representation::Real,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Binary,
    Real,
}

impl std::fmt::Display for Representation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Representation::Binary => f.write_str("binary"),
            Representation::Real => f.write_str("real"),
        }
    }
}

/// Per-dimension box constraints for real genotypes.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidInput(format!("bad bound pair [{lo}, {hi}]")));
            }
        }
        Ok(Bounds { lower, upper })
    }

    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Bounds::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn clip(&self, x: &mut [f64]) {
        for ((v, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(&self.lower)
                .zip(&self.upper)
                .all(|((v, lo), hi)| *lo <= *v && *v <= *hi)
    }
}

/// The unified search space shared by a target task and its sources.
#[derive(Debug, Clone, PartialEq)]
pub enum Space {
    Binary { dim: usize },
    Real { bounds: Bounds },
}

impl Space {
    pub fn dim(&self) -> usize {
        match self {
            Space::Binary { dim } => *dim,
            Space::Real { bounds } => bounds.dim(),
        }
    }

    pub fn representation(&self) -> Representation {
        match self {
            Space::Binary { .. } => Representation::Binary,
            Space::Real { .. } => Representation::Real,
        }
    }

    pub fn bounds(&self) -> Option<&Bounds> {
        match self {
            Space::Real { bounds } => Some(bounds),
            Space::Binary { .. } => None,
        }
    }

    /// Checks that `g` has the right representation and length.
    pub fn check(&self, g: &Genotype) -> Result<()> {
        if g.representation() != self.representation() {
            return Err(Error::Representation(format!(
                "expected {} genotype, found {}",
                self.representation(),
                g.representation()
            )));
        }
        if g.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: g.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    /// Maps a raw objective value to maximization-oriented fitness.
    #[inline]
    pub fn orient(self, objective: f64) -> f64 {
        match self {
            Sense::Maximize => objective,
            Sense::Minimize => -objective,
        }
    }
}

/// An optimization task over a [`Space`].
///
/// `objective` must be deterministic. `repair`, when it returns `Some`, yields a
/// feasible genotype which is what gets scored.
pub trait Task: Send + Sync {
    fn space(&self) -> &Space;

    fn sense(&self) -> Sense;

    fn objective(&self, g: &Genotype) -> f64;

    fn repair(&self, _g: &Genotype) -> Option<Genotype> {
        None
    }

    /// Lower bound on the maximization-oriented fitness, if known.
    fn fitness_lower_bound(&self) -> Option<f64> {
        None
    }

    /// Short human-readable identifier, used in config hashes and logs.
    fn describe(&self) -> String;

    fn dim(&self) -> usize {
        self.space().dim()
    }
}

/// Whether repaired genotypes replace the originals in the evaluated population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WriteBack {
    #[default]
    Lamarckian,
    Baldwinian,
}

impl WriteBack {
    pub fn from_flag(lamarckian: bool) -> Self {
        if lamarckian {
            WriteBack::Lamarckian
        } else {
            WriteBack::Baldwinian
        }
    }
}

/// Genotypes with their (maximization-oriented) fitness.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Population {
    pub genotypes: Vec<Genotype>,
    pub fitness: Vec<f64>,
    /// Objective calls spent producing this population.
    pub evaluations: u64,
}

impl Population {
    pub fn len(&self) -> usize {
        self.genotypes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genotypes.is_empty()
    }

    pub fn mean_fitness(&self) -> f64 {
        if self.fitness.is_empty() {
            return f64::NAN;
        }
        self.fitness.iter().sum::<f64>() / self.fitness.len() as f64
    }

    pub fn best_index(&self) -> Option<usize> {
        self.fitness
            .iter()
            .enumerate()
            .fold(None, |acc: Option<(usize, f64)>, (i, &f)| match acc {
                Some((_, b)) if b >= f => acc,
                _ => Some((i, f)),
            })
            .map(|(i, _)| i)
    }

    pub fn best_fitness(&self) -> f64 {
        self.best_index().map_or(f64::NAN, |i| self.fitness[i])
    }
}

/// Scores `genotypes` against `task`.
///
/// Repair (when the task has one) is applied before scoring; with
/// [`WriteBack::Lamarckian`] the repaired genotype is what ends up in the
/// population. Minimization objectives are negated.
pub fn evaluate(task: &dyn Task, genotypes: Vec<Genotype>, write_back: WriteBack) -> Result<Population> {
    let space = task.space();
    for g in &genotypes {
        space.check(g)?;
    }
    let sense = task.sense();
    let mut fitness = Vec::with_capacity(genotypes.len());
    let mut out = Vec::with_capacity(genotypes.len());
    for g in genotypes {
        match task.repair(&g) {
            Some(repaired) => {
                fitness.push(sense.orient(task.objective(&repaired)));
                out.push(match write_back {
                    WriteBack::Lamarckian => repaired,
                    WriteBack::Baldwinian => g,
                });
            }
            None => {
                fitness.push(sense.orient(task.objective(&g)));
                out.push(g);
            }
        }
    }
    let evaluations = out.len() as u64;
    Ok(Population {
        genotypes: out,
        fitness,
        evaluations,
    })
}


#[cfg(test)]
mod tests {
    use super::test_tasks::*;
    use super::*;

    #[test]
    fn empty_list_costs_nothing() {
        let pop = evaluate(&OneMax::new(3), vec![], WriteBack::Lamarckian).unwrap();
        assert!(pop.is_empty());
        assert_eq!(pop.evaluations, 0);
    }

    #[test]
    fn minimize_is_negated_once() {
        let task = Sphere::new(2);
        let pop = evaluate(&task, vec![Genotype::Real(vec![0.3, 0.6])], WriteBack::Lamarckian)
            .unwrap();
        assert!((pop.fitness[0] + 0.09).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let err = evaluate(&OneMax::new(3), vec![Genotype::Binary(vec![true])], WriteBack::Lamarckian)
            .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 3, found: 1 }));
        let err = evaluate(&OneMax::new(1), vec![Genotype::Real(vec![0.0])], WriteBack::Lamarckian)
            .unwrap_err();
        assert!(matches!(err, Error::Representation(_)));
    }

    #[test]
    fn best_prefers_first_on_ties() {
        let pop = Population {
            genotypes: vec![Genotype::Binary(vec![]); 3],
            fitness: vec![1.0, 3.0, 3.0],
            evaluations: 3,
        };
        assert_eq!(pop.best_index(), Some(1));
        assert_eq!(pop.mean_fitness(), 7.0 / 3.0);
    }
}
