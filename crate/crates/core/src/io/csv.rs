//! Long-format CSV traces.
//!
//! Run traces: `run_id,seed,algorithm,generation,evaluations,best_fitness,mean_fitness,wall_ms`.
//! Coefficient trajectories: `run_id,transfer_step,model_index,related_flag,weight`,
//! where `related_flag` is `related`, `unrelated` or `target`.
//! Numbers use Rust's shortest round-trip decimal form.

use std::fs::File;
use std::path::Path;

use crate::ea::RunRecord;
use crate::error::{Error, Result};

pub const RUN_HEADER: [&str; 8] = [
    "run_id",
    "seed",
    "algorithm",
    "generation",
    "evaluations",
    "best_fitness",
    "mean_fitness",
    "wall_ms",
];

pub const WEIGHTS_HEADER: [&str; 5] = ["run_id", "transfer_step", "model_index", "related_flag", "weight"];

pub const SUMMARY_HEADER: [&str; 8] = [
    "algorithm",
    "generation",
    "evaluations",
    "runs",
    "median_best",
    "mean_best",
    "sd_best",
    "mean_of_mean_fitness",
];

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(mut w: csv::Writer<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_run_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(RUN_HEADER)?;
    for (run_id, r) in records.iter().enumerate() {
        for g in &r.generations {
            w.write_record([
                run_id.to_string(),
                r.seed.to_string(),
                r.algorithm.clone(),
                g.generation.to_string(),
                g.evaluations.to_string(),
                g.best_fitness.to_string(),
                g.mean_fitness.to_string(),
                g.wall_ms.to_string(),
            ])?;
        }
    }
    finish(w, path)
}

/// `related` holds one flag per source; the extra last slot is the target.
pub fn write_weights_csv(records: &[RunRecord], related: &[bool], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(WEIGHTS_HEADER)?;
    for (run_id, r) in records.iter().enumerate() {
        for t in &r.transfers {
            let target = t.weights.len() - 1;
            for (k, weight) in t.weights.iter().enumerate() {
                let flag = if k == target {
                    "target"
                } else if related.get(k).copied().unwrap_or(false) {
                    "related"
                } else {
                    "unrelated"
                };
                w.write_record([
                    run_id.to_string(),
                    t.step.to_string(),
                    k.to_string(),
                    flag.to_string(),
                    weight.to_string(),
                ])?;
            }
        }
    }
    finish(w, path)
}

/// Median, mean and sample standard deviation of `values`.
pub fn describe(values: &[f64]) -> (f64, f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    (median, mean, sd)
}

/// Per-algorithm, per-generation statistics across runs.
pub fn write_summary_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SUMMARY_HEADER)?;
    let mut algorithms: Vec<&str> = Vec::new();
    for r in records {
        if !algorithms.contains(&r.algorithm.as_str()) {
            algorithms.push(&r.algorithm);
        }
    }
    for alg in algorithms {
        let runs: Vec<&RunRecord> = records.iter().filter(|r| r.algorithm == alg).collect();
        let generations = runs.iter().map(|r| r.generations.len()).min().unwrap_or(0);
        for g in 0..generations {
            let best: Vec<f64> = runs.iter().map(|r| r.generations[g].best_fitness).collect();
            let mean_fit: Vec<f64> = runs.iter().map(|r| r.generations[g].mean_fitness).collect();
            let (median, mean, sd) = describe(&best);
            w.write_record([
                alg.to_string(),
                g.to_string(),
                runs[0].generations[g].evaluations.to_string(),
                runs.len().to_string(),
                median.to_string(),
                mean.to_string(),
                sd.to_string(),
                describe(&mean_fit).1.to_string(),
            ])?;
        }
    }
    finish(w, path)
}

/// Writes a header row and data rows of already-formatted fields.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    finish(w, path)
}
