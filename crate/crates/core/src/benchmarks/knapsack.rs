//! Random 0/1 knapsack instances and greedy ratio repair.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngHandle;
use crate::types::{Genotype, Sense, Space, Task};

/// How item values relate to item weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Correlation {
    /// Values and weights drawn independently from `U[1, 10]`.
    #[serde(alias = "un")]
    Uc,
    /// `v = w + U[-5, 5]`, resampled until positive.
    Wc,
    /// `v = w + 5`.
    Sc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapacityKind {
    /// Fixed capacity of 20.
    Rc,
    /// Half the total item weight.
    Ac,
}

impl std::fmt::Display for Correlation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Correlation::Uc => "uc",
            Correlation::Wc => "wc",
            Correlation::Sc => "sc",
        })
    }
}

impl std::fmt::Display for CapacityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CapacityKind::Rc => "rc",
            CapacityKind::Ac => "ac",
        })
    }
}

const WC_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackInstance {
    values: Vec<f64>,
    weights: Vec<f64>,
    capacity: f64,
    correlation: Correlation,
    capacity_kind: CapacityKind,
    seed: u64,
    space: Space,
    // item indices by ascending value/weight ratio, ties by index
    removal_order: Vec<usize>,
}

impl KnapsackInstance {
    pub fn new(
        values: Vec<f64>,
        weights: Vec<f64>,
        capacity: f64,
        correlation: Correlation,
        capacity_kind: CapacityKind,
        seed: u64,
    ) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: values.len(),
                found: weights.len(),
            });
        }
        if values.is_empty() {
            return Err(Error::InvalidInput("knapsack needs at least one item".into()));
        }
        if values.iter().chain(&weights).any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidInput("item values and weights must be positive".into()));
        }
        if !(capacity.is_finite() && capacity > 0.0) {
            return Err(Error::InvalidInput(format!("capacity {capacity} must be positive")));
        }
        let mut removal_order: Vec<usize> = (0..values.len()).collect();
        removal_order.sort_by(|&a, &b| (values[a] / weights[a]).total_cmp(&(values[b] / weights[b])));
        let space = Space::Binary { dim: values.len() };
        Ok(KnapsackInstance {
            values,
            weights,
            capacity,
            correlation,
            capacity_kind,
            seed,
            space,
            removal_order,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn correlation(&self) -> Correlation {
        self.correlation
    }

    pub fn capacity_kind(&self) -> CapacityKind {
        self.capacity_kind
    }

    pub fn total_weight(&self, bits: &[bool]) -> f64 {
        bits.iter().zip(&self.weights).filter(|(b, _)| **b).map(|(_, w)| w).sum()
    }

    pub fn total_value(&self, bits: &[bool]) -> f64 {
        bits.iter().zip(&self.values).filter(|(b, _)| **b).map(|(_, v)| v).sum()
    }

    pub fn is_feasible(&self, bits: &[bool]) -> bool {
        self.total_weight(bits) <= self.capacity
    }

    /// Drops selected items in ascending value/weight order until the load
    /// fits. Feasible selections come back unchanged.
    pub fn dantzig_repair(&self, bits: &[bool]) -> Vec<bool> {
        let mut out = bits.to_vec();
        let mut load = self.total_weight(bits);
        for &i in &self.removal_order {
            if load <= self.capacity {
                break;
            }
            if out[i] {
                out[i] = false;
                load -= self.weights[i];
            }
        }
        out
    }
}

/// Draws a `d`-item instance of the given family.
pub fn gen_knapsack(
    d: usize,
    correlation: Correlation,
    capacity_kind: CapacityKind,
    seed: u64,
) -> Result<KnapsackInstance> {
    if d == 0 {
        return Err(Error::InvalidInput("knapsack needs at least one item".into()));
    }
    let mut rng = RngHandle::new(seed).child("knapsack").rng();
    let mut values = Vec::with_capacity(d);
    let mut weights = Vec::with_capacity(d);
    for _ in 0..d {
        let (v, w) = match correlation {
            Correlation::Uc => (rng.random_range(1.0..=10.0), rng.random_range(1.0..=10.0)),
            Correlation::Sc => {
                let w = rng.random_range(1.0..=10.0);
                (w + 5.0, w)
            }
            Correlation::Wc => weakly_correlated_item(&mut rng),
        };
        values.push(v);
        weights.push(w);
    }
    let capacity = match capacity_kind {
        CapacityKind::Rc => 20.0,
        CapacityKind::Ac => 0.5 * weights.iter().sum::<f64>(),
    };
    KnapsackInstance::new(values, weights, capacity, correlation, capacity_kind, seed)
}

fn weakly_correlated_item<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    loop {
        let w: f64 = rng.random_range(1.0..=10.0);
        for _ in 0..WC_ATTEMPTS {
            let v = w + rng.random_range(-5.0..=5.0);
            if v > 0.0 {
                return (v, w);
            }
        }
    }
}

impl Task for KnapsackInstance {
    fn space(&self) -> &Space {
        &self.space
    }

    fn sense(&self) -> Sense {
        Sense::Maximize
    }

    fn objective(&self, g: &Genotype) -> f64 {
        self.total_value(g.as_binary().expect("knapsack genotypes are binary"))
    }

    fn repair(&self, g: &Genotype) -> Option<Genotype> {
        g.as_binary().map(|b| Genotype::Binary(self.dantzig_repair(b)))
    }

    fn fitness_lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }

    fn describe(&self) -> String {
        format!(
            "knapsack-{}-{}-d{}-s{}",
            self.correlation,
            self.capacity_kind,
            self.values.len(),
            self.seed
        )
    }
}
