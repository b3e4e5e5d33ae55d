use nalgebra::{Cholesky, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::types::{Bounds, Genotype, Population};

const JITTER_START: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-2;

/// Multivariate normal with a cached Cholesky factor.
#[derive(Debug, Clone)]
pub struct GaussianModel {
    mean: Vec<f64>,
    cov: DMatrix<f64>,
    // lower Cholesky factor
    l: DMatrix<f64>,
    log_det: f64,
}

impl PartialEq for GaussianModel {
    fn eq(&self, other: &Self) -> bool {
        self.mean == other.mean && self.cov == other.cov
    }
}

impl GaussianModel {
    /// Builds a model from an explicit mean and (already positive-definite)
    /// covariance. No jitter is added.
    pub fn new(mean: Vec<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: cov.nrows(),
            });
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite Gaussian parameter".into()));
        }
        for i in 0..d {
            for j in 0..i {
                if cov[(i, j)] != cov[(j, i)] {
                    return Err(Error::InvalidInput("covariance is not symmetric".into()));
                }
            }
        }
        let chol = Cholesky::new(cov.clone()).ok_or(Error::NotPositiveDefinite { jitter: 0.0 })?;
        let l = chol.l();
        let log_det = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        Ok(GaussianModel {
            mean,
            cov,
            l,
            log_det,
        })
    }

    /// Sample mean and covariance (denominator `n`) of `pop`, with `δ·I` added,
    /// `δ` starting at 1e-10 and growing tenfold until the factorization
    /// succeeds.
    pub fn fit(pop: &Population) -> Result<Self> {
        let first = pop
            .genotypes
            .first()
            .ok_or_else(|| Error::InvalidInput("cannot fit a model to an empty population".into()))?;
        let d = first.len();
        let n = pop.len() as f64;
        let mut rows = Vec::with_capacity(pop.len());
        for g in &pop.genotypes {
            let x = g
                .as_real()
                .ok_or_else(|| Error::Representation("Gaussian fit needs real genotypes".into()))?;
            if x.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: x.len(),
                });
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite genotype value".into()));
            }
            rows.push(x);
        }
        let mut mean = vec![0.0; d];
        for x in &rows {
            for (m, v) in mean.iter_mut().zip(x.iter()) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let cov = sample_covariance(&rows, &mean);
        let mut jitter = JITTER_START;
        loop {
            let mut c = cov.clone();
            for i in 0..d {
                c[(i, i)] += jitter;
            }
            match GaussianModel::new(mean.clone(), c) {
                Ok(m) => return Ok(m),
                Err(Error::NotPositiveDefinite { .. }) if jitter < JITTER_MAX => jitter *= 10.0,
                Err(Error::NotPositiveDefinite { .. }) => {
                    return Err(Error::NotPositiveDefinite { jitter })
                }
                Err(e) => return Err(e),
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// Draws `μ + L z`, clipped coordinate-wise to `bounds` when given.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, bounds: Option<&Bounds>) -> Genotype {
        let d = self.dim();
        let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let mut x = self.mean.clone();
        for (i, xi) in x.iter_mut().enumerate() {
            for (j, zj) in z.iter().enumerate().take(i + 1) {
                *xi += self.l[(i, j)] * zj;
            }
        }
        if let Some(b) = bounds {
            b.clip(&mut x);
        }
        Genotype::Real(x)
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let l = &self.l;
        let mut y = vec![0.0; d];
        for i in 0..d {
            let mut s = x[i] - self.mean[i];
            for (j, yj) in y.iter().enumerate().take(i) {
                s -= l[(i, j)] * yj;
            }
            y[i] = s / l[(i, i)];
        }
        let maha: f64 = y.iter().map(|v| v * v).sum();
        -0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + self.log_det + maha)
    }
}

fn sample_covariance(rows: &[&[f64]], mean: &[f64]) -> DMatrix<f64> {
    let d = mean.len();
    let n = rows.len() as f64;
    let mut cov = DMatrix::zeros(d, d);
    for x in rows {
        for i in 0..d {
            let di = x[i] - mean[i];
            for j in 0..=i {
                cov[(i, j)] += di * (x[j] - mean[j]);
            }
        }
    }
    for i in 0..d {
        for j in 0..=i {
            let v = cov[(i, j)] / n;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    cov
}
