//! Variation and selection operators for the host GA.

use rand::Rng;

use crate::types::{Bounds, Genotype, Population};

/// Swaps each locus with probability 0.5, applied to the pair with
/// probability `rate`.
pub fn uniform_crossover<R: Rng + ?Sized>(
    a: &[bool],
    b: &[bool],
    rate: f64,
    rng: &mut R,
) -> (Vec<bool>, Vec<bool>) {
    let mut c1 = a.to_vec();
    let mut c2 = b.to_vec();
    if rng.random::<f64>() < rate {
        for j in 0..c1.len() {
            if rng.random::<bool>() {
                std::mem::swap(&mut c1[j], &mut c2[j]);
            }
        }
    }
    (c1, c2)
}

pub fn bitflip_mutation<R: Rng + ?Sized>(g: &mut [bool], rate: f64, rng: &mut R) {
    if rate <= 0.0 {
        return;
    }
    for bit in g.iter_mut() {
        if rng.random::<f64>() < rate {
            *bit = !*bit;
        }
    }
}

/// Spread factor for simulated binary crossover from a uniform draw `u`.
#[inline]
pub fn sbx_beta(u: f64, eta: f64) -> f64 {
    let e = 1.0 / (eta + 1.0);
    if u <= 0.5 {
        (2.0 * u).powf(e)
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(e)
    }
}

/// Simulated binary crossover. With probability `rate` the pair is crossed;
/// each coordinate is then recombined with probability 0.5. Children are
/// clipped to `bounds`.
pub fn sbx_crossover<R: Rng + ?Sized>(
    a: &[f64],
    b: &[f64],
    eta: f64,
    rate: f64,
    bounds: &Bounds,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = a.to_vec();
    let mut c2 = b.to_vec();
    if rng.random::<f64>() < rate {
        for j in 0..c1.len() {
            if rng.random::<f64>() >= 0.5 {
                continue;
            }
            let beta = sbx_beta(rng.random::<f64>(), eta);
            // midpoint form keeps equal parents exact
            let mid = 0.5 * (a[j] + b[j]);
            let half = 0.5 * beta * (a[j] - b[j]);
            c1[j] = mid + half;
            c2[j] = mid - half;
        }
        bounds.clip(&mut c1);
        bounds.clip(&mut c2);
    }
    (c1, c2)
}

/// Bounded polynomial mutation step for a single coordinate given the
/// uniform draw `u`.
pub fn polynomial_step(y: f64, lo: f64, hi: f64, eta: f64, u: f64) -> f64 {
    let span = hi - lo;
    let d1 = (y - lo) / span;
    let d2 = (hi - y) / span;
    let pow = 1.0 / (eta + 1.0);
    let dq = if u < 0.5 {
        let xy = 1.0 - d1;
        let val = 2.0 * u + (1.0 - 2.0 * u) * xy.powf(eta + 1.0);
        val.powf(pow) - 1.0
    } else {
        let xy = 1.0 - d2;
        let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * xy.powf(eta + 1.0);
        1.0 - val.powf(pow)
    };
    (y + dq * span).clamp(lo, hi)
}

pub fn polynomial_mutation<R: Rng + ?Sized>(
    g: &mut [f64],
    eta: f64,
    rate: f64,
    bounds: &Bounds,
    rng: &mut R,
) {
    if rate <= 0.0 {
        return;
    }
    for (j, y) in g.iter_mut().enumerate() {
        if rng.random::<f64>() < rate {
            *y = polynomial_step(*y, bounds.lower()[j], bounds.upper()[j], eta, rng.random());
        }
    }
}

/// The `n` fittest members of `parents ∪ offspring`. Ties go to parents, then
/// to the lower index.
pub fn elitist_select(parents: Population, offspring: Population, n: usize) -> Population {
    let evaluations = parents.evaluations + offspring.evaluations;
    let mut pool: Vec<(Genotype, f64)> = parents
        .genotypes
        .into_iter()
        .zip(parents.fitness)
        .chain(offspring.genotypes.into_iter().zip(offspring.fitness))
        .collect();
    // stable sort keeps the parent-first, lower-index order among equals
    pool.sort_by(|a, b| b.1.total_cmp(&a.1));
    pool.truncate(n);
    let (genotypes, fitness) = pool.into_iter().unzip();
    Population {
        genotypes,
        fitness,
        evaluations,
    }
}
