//! Stacked density estimation: EM over mixture weights with frozen components.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::SearchModel;
use crate::types::Population;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmConfig {
    pub max_iterations: u32,
    /// Stop once `|ΔLL| < tolerance · |LL|`.
    pub tolerance: f64,
    /// Minimum weight kept on the last (target) component. 0 disables it.
    pub target_floor: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            max_iterations: 100,
            tolerance: 1e-6,
            target_floor: 0.0,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::Config("EM needs at least one iteration".into()));
        }
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Config(format!("EM tolerance {} must be >= 0", self.tolerance)));
        }
        if !(0.0..1.0).contains(&self.target_floor) {
            return Err(Error::Config(format!(
                "target weight floor {} outside [0, 1)",
                self.target_floor
            )));
        }
        Ok(())
    }
}

/// Result of [`em_weights`].
#[derive(Debug, Clone)]
pub struct EmFit {
    pub weights: Vec<f64>,
    /// Data log-likelihood at the start of each iteration, plus the final value.
    pub log_likelihoods: Vec<f64>,
    pub iterations: u32,
}

/// Row-major `n × models` matrix of log-densities.
#[derive(Debug, Clone)]
pub struct LogDensityMatrix {
    pub values: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
}

impl LogDensityMatrix {
    pub fn build(models: &[&SearchModel], pop: &Population) -> Result<Self> {
        let rows = pop.len();
        let cols = models.len();
        let mut values = Vec::with_capacity(rows * cols);
        for g in &pop.genotypes {
            for m in models {
                values.push(m.log_density(g)?);
            }
        }
        Ok(LogDensityMatrix { values, rows, cols })
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }
}

/// Data log-likelihood of `w` under the fixed components.
pub fn mixture_log_likelihood(logp: &LogDensityMatrix, w: &[f64]) -> f64 {
    let ln_w: Vec<f64> = w.iter().map(|v| v.ln()).collect();
    (0..logp.rows)
        .map(|i| log_sum_exp(logp.row(i).iter().zip(&ln_w).map(|(a, b)| a + b)))
        .sum()
}

fn log_sum_exp(it: impl Iterator<Item = f64> + Clone) -> f64 {
    let top = it.clone().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + it.map(|v| (v - top).exp()).sum::<f64>().ln()
}

/// Runs EM from uniform weights on a precomputed density matrix.
pub fn em_weights(logp: &LogDensityMatrix, cfg: &EmConfig) -> Result<EmFit> {
    cfg.validate()?;
    let (n, k) = (logp.rows, logp.cols);
    if n == 0 || k == 0 {
        return Err(Error::InvalidInput("EM needs at least one point and one component".into()));
    }
    if let Some(i) = (0..n).find(|&i| logp.row(i).iter().all(|v| *v == f64::NEG_INFINITY)) {
        return Err(Error::InvalidInput(format!(
            "point {i} has zero density under every component"
        )));
    }
    let mut w = vec![1.0 / k as f64; k];
    let mut trace = Vec::new();
    let mut resp_sum = vec![0.0; k];
    let mut scratch = vec![0.0; k];
    let mut iterations = 0;
    let mut previous = f64::NEG_INFINITY;
    while iterations < cfg.max_iterations {
        let ln_w: Vec<f64> = w.iter().map(|v| v.ln()).collect();
        resp_sum.iter_mut().for_each(|v| *v = 0.0);
        let mut ll = 0.0;
        for i in 0..n {
            let row = logp.row(i);
            let mut top = f64::NEG_INFINITY;
            for j in 0..k {
                scratch[j] = row[j] + ln_w[j];
                top = top.max(scratch[j]);
            }
            let mut z = 0.0;
            for s in scratch.iter_mut() {
                *s = (*s - top).exp();
                z += *s;
            }
            ll += top + z.ln();
            for j in 0..k {
                resp_sum[j] += scratch[j] / z;
            }
        }
        trace.push(ll);
        iterations += 1;
        for j in 0..k {
            w[j] = resp_sum[j] / n as f64;
        }
        apply_floor(&mut w, cfg.target_floor);
        let converged = (ll - previous).abs() < cfg.tolerance * ll.abs();
        previous = ll;
        if converged {
            break;
        }
    }
    trace.push(mixture_log_likelihood(logp, &w));
    crate::models::normalize(&mut w)
        .ok_or_else(|| Error::InvalidInput("EM produced a degenerate weight vector".into()))?;
    Ok(EmFit {
        weights: w,
        log_likelihoods: trace,
        iterations,
    })
}

fn apply_floor(w: &mut [f64], floor: f64) {
    let last = w.len() - 1;
    if floor <= 0.0 || w[last] >= floor || last == 0 {
        return;
    }
    let rest: f64 = w[..last].iter().sum();
    if rest > 0.0 {
        let scale = (1.0 - floor) / rest;
        w[..last].iter_mut().for_each(|v| *v *= scale);
    }
    w[last] = floor;
}

/// Mixture weights over `models` (target model last) that maximize the
/// likelihood of `pop`.
pub fn em_fit_weights(models: &[&SearchModel], pop: &Population, cfg: &EmConfig) -> Result<Vec<f64>> {
    let logp = LogDensityMatrix::build(models, pop)?;
    Ok(em_weights(&logp, cfg)?.weights)
}
