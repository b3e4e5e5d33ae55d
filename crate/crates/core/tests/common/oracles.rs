//! Independent reference implementations, and the checks that compare the
//! library against them. Each check returns a one-line summary or the first
//! disagreement.

#![allow(clippy::needless_range_loop)]

use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use streo::baselines::em::{em_weights, mixture_log_likelihood, EmConfig, LogDensityMatrix};
use streo::benchmarks::{arm_tip, gen_knapsack, ArmTask, CapacityKind, Correlation, KnapsackInstance};
use streo::ea::operators::elitist_select;
use streo::ea::{run, EaConfig, TransferMode};
use streo::models::{allocate_samples, BernoulliModel, GaussianModel, SearchModel};
use streo::similarity::{init_state, similarity_step, HyperParams, MutationVector};
use streo::{Genotype, Population, RngHandle, Task, WriteBack};

pub type Check = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- oracles

pub fn incremental_mean() -> Check {
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for stream in 0..1000 {
        let len = r.random_range(1..300);
        let values: Vec<f64> = (0..len).map(|_| r.random_range(-1e3..1e3)).collect();
        let mut mv = MutationVector::new(1, 0.0);
        for &v in &values {
            mv.push(0, v);
        }
        let batch = values.iter().sum::<f64>() / len as f64;
        let err = (mv.values[0] - batch).abs();
        worst = worst.max(err);
        if err > 1e-9 {
            return Err(format!("stream {stream}: incremental {} vs batch {batch}", mv.values[0]));
        }
    }
    Ok(format!("incremental mean: 1000 streams, max error {worst:.1e}"))
}

/// Tip as the sum of link vectors at cumulative joint angles.
pub fn arm_tip_trig(alpha: &[f64], length: f64, max_angle: f64) -> (f64, f64) {
    let link = length / alpha.len() as f64;
    let (mut x, mut y, mut theta) = (0.0, 0.0, 0.0);
    for &a in alpha {
        theta += 2.0 * std::f64::consts::PI * max_angle * (a - 0.5);
        x += link * theta.cos();
        y += link * theta.sin();
    }
    (x, y)
}

pub fn arm_kinematics() -> Check {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for d in [1usize, 2, 10, 20] {
        for case in 0..1000 {
            let alpha: Vec<f64> = (0..d).map(|_| r.random()).collect();
            let length = r.random_range(1e-3..=std::f64::consts::SQRT_2);
            let max_angle = r.random_range(1e-3..=1.0);
            let (x, y) = arm_tip(&alpha, length, max_angle);
            let (ox, oy) = arm_tip_trig(&alpha, length, max_angle);
            let err = (x - ox).abs().max((y - oy).abs());
            worst = worst.max(err);
            if err > 1e-12 {
                return Err(format!("d={d} case {case}: ({x}, {y}) vs ({ox}, {oy})"));
            }
        }
    }
    Ok(format!("arm tip: 4000 configurations, max error {worst:.1e}"))
}

/// Repeatedly drops the selected item with the lowest value/weight ratio
/// (lowest index among equals), scanning every item each time.
pub fn repair_by_scanning(k: &KnapsackInstance, bits: &[bool]) -> Vec<bool> {
    let mut out = bits.to_vec();
    let load = |b: &[bool]| -> f64 { b.iter().zip(k.weights()).filter(|(s, _)| **s).map(|(_, w)| w).sum() };
    while load(&out) > k.capacity() {
        let mut pick: Option<usize> = None;
        for i in 0..out.len() {
            if !out[i] {
                continue;
            }
            let ratio = k.values()[i] / k.weights()[i];
            match pick {
                Some(j) if k.values()[j] / k.weights()[j] <= ratio => {}
                _ => pick = Some(i),
            }
        }
        out[pick.expect("an overweight selection has an item")] = false;
    }
    out
}

fn random_instance(r: &mut ChaCha8Rng, d: usize) -> KnapsackInstance {
    let corr = [Correlation::Uc, Correlation::Wc, Correlation::Sc][r.random_range(0..3)];
    let cap = [CapacityKind::Rc, CapacityKind::Ac][r.random_range(0..2)];
    gen_knapsack(d, corr, cap, r.random()).unwrap()
}

pub fn knapsack_repair() -> Check {
    let mut r = rng(3);
    for case in 0..1000 {
        let d = r.random_range(1..=60);
        let k = random_instance(&mut r, d);
        let density: f64 = r.random();
        let bits: Vec<bool> = (0..d).map(|_| r.random_bool(density)).collect();
        let fixed = k.dantzig_repair(&bits);
        if !k.is_feasible(&fixed) {
            return Err(format!("case {case}: repaired selection overweight"));
        }
        if fixed.iter().zip(&bits).any(|(f, b)| *f && !*b) {
            return Err(format!("case {case}: repair added an item"));
        }
        if d <= 15 && fixed != repair_by_scanning(&k, &bits) {
            return Err(format!("case {case}: differs from the scanning oracle"));
        }
    }
    // small instances, every selection
    for d in 1..=10 {
        let k = random_instance(&mut r, d);
        for mask in 0u32..(1 << d) {
            let bits: Vec<bool> = (0..d).map(|i| mask >> i & 1 == 1).collect();
            if k.dantzig_repair(&bits) != repair_by_scanning(&k, &bits) {
                return Err(format!("d={d} mask {mask:b}: differs from the scanning oracle"));
            }
        }
    }
    Ok("repair: 1000 random pairs feasible and subsets; exhaustive agreement for d <= 10, sampled for d <= 15".into())
}

/// Best log-likelihood point of a 3-simplex lattice with spacing `step`.
pub fn simplex_grid_argmax(logp: &LogDensityMatrix, step: f64) -> Vec<f64> {
    let steps = (1.0 / step).round() as usize;
    let mut best = (f64::NEG_INFINITY, vec![0.0; 3]);
    for a in 0..=steps {
        for b in 0..=(steps - a) {
            let w = [a as f64 * step, b as f64 * step, (steps - a - b) as f64 * step];
            let ll = mixture_log_likelihood(logp, &w);
            if ll > best.0 {
                best = (ll, w.to_vec());
            }
        }
    }
    best.1
}

pub fn em_against_grid() -> Check {
    let mut r = rng(4);
    // run to the fixed point; the default stopping rule is reported alongside
    let cfg = EmConfig {
        max_iterations: 10_000,
        tolerance: 1e-12,
        ..EmConfig::default()
    };
    let mut worst = 0.0f64;
    let mut worst_default = 0.0f64;
    for case in 0..5 {
        let d = 6;
        let models: Vec<SearchModel> = (0..3)
            .map(|_| {
                let p = (0..d).map(|_| r.random_range(0.1..0.9)).collect();
                SearchModel::Bernoulli(BernoulliModel::from_probs(p).unwrap())
            })
            .collect();
        // data from a known mixture of the first two components
        let mix = r.random_range(0.2..0.8);
        let genotypes: Vec<Genotype> = (0..40)
            .map(|_| {
                let m = if r.random::<f64>() < mix { &models[0] } else { &models[1] };
                m.sample(&mut r, None)
            })
            .collect();
        let pop = Population {
            fitness: vec![0.0; genotypes.len()],
            genotypes,
            evaluations: 0,
        };
        let refs: Vec<&SearchModel> = models.iter().collect();
        let logp = LogDensityMatrix::build(&refs, &pop).unwrap();
        let fit = em_weights(&logp, &cfg).unwrap();
        if let Some(w) = fit.log_likelihoods.windows(2).find(|w| w[1] < w[0] - 1e-9 * w[0].abs()) {
            return Err(format!("case {case}: log-likelihood fell from {} to {}", w[0], w[1]));
        }
        let grid = simplex_grid_argmax(&logp, 0.001);
        let quick = em_weights(&logp, &EmConfig::default()).unwrap().weights;
        for (a, b) in quick.iter().zip(&grid) {
            worst_default = worst_default.max((a - b).abs());
        }
        for (a, b) in fit.weights.iter().zip(&grid) {
            worst = worst.max((a - b).abs());
            if (a - b).abs() > 2e-3 {
                return Err(format!("case {case}: EM {:?} vs grid {grid:?}", fit.weights));
            }
        }
    }
    Ok(format!(
        "EM: 5 instances within {worst:.1e} of the 0.001 grid (default stopping rule {worst_default:.1e}), log-likelihood monotone"
    ))
}

/// Repeated extraction of the fittest remaining member (first wins ties).
pub fn select_by_extraction(pool: &[(Genotype, f64)], n: usize) -> Vec<(Genotype, f64)> {
    let mut left: Vec<(Genotype, f64)> = pool.to_vec();
    let mut out = Vec::new();
    while out.len() < n && !left.is_empty() {
        let mut best = 0;
        for i in 1..left.len() {
            if left[i].1 > left[best].1 {
                best = i;
            }
        }
        out.push(left.remove(best));
    }
    out
}

pub fn elitist_selection() -> Check {
    let mut r = rng(5);
    for case in 0..1000 {
        let (np, no) = (r.random_range(1..30), r.random_range(0..30));
        let n = r.random_range(1..=np + no);
        // a coarse fitness grid makes ties common
        let mut member = |k: usize| (Genotype::Real(vec![k as f64]), r.random_range(0..8) as f64);
        let parents: Vec<_> = (0..np).map(&mut member).collect();
        let offspring: Vec<_> = (np..np + no).map(&mut member).collect();
        let pool: Vec<_> = parents.iter().chain(&offspring).cloned().collect();
        let expected = select_by_extraction(&pool, n);
        let pop = |v: &[(Genotype, f64)]| Population {
            genotypes: v.iter().map(|m| m.0.clone()).collect(),
            fitness: v.iter().map(|m| m.1).collect(),
            evaluations: v.len() as u64,
        };
        let got = elitist_select(pop(&parents), pop(&offspring), n);
        let got: Vec<_> = got.genotypes.into_iter().zip(got.fitness).collect();
        if got != expected {
            return Err(format!("case {case}: selection differs from the extraction oracle"));
        }
    }
    Ok("elitist selection: 1000 random unions match the extraction oracle".into())
}

pub fn gaussian_moments() -> Check {
    let mut r = rng(6);
    let (n, d) = (50, 10);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.random_range(-2.0..2.0)).collect()).collect();
    let mut mean = vec![0.0; d];
    for x in &rows {
        for j in 0..d {
            mean[j] += x[j] / n as f64;
        }
    }
    let pop = Population {
        genotypes: rows.iter().cloned().map(Genotype::Real).collect(),
        fitness: vec![0.0; n],
        evaluations: 0,
    };
    let model = GaussianModel::fit(&pop).map_err(|e| e.to_string())?;
    for a in 0..d {
        for b in 0..d {
            let brute: f64 = rows.iter().map(|x| (x[a] - mean[a]) * (x[b] - mean[b])).sum::<f64>() / n as f64;
            let jitter = if a == b { 1e-10 } else { 0.0 };
            let err = (model.cov()[(a, b)] - jitter - brute).abs();
            if err > 1e-10 {
                return Err(format!("covariance ({a}, {b}) off by {err:e}"));
            }
        }
    }
    // naive density in d = 3 via cofactor inverse and determinant
    for case in 0..100 {
        let m: Vec<f64> = (0..9).map(|_| r.random_range(-1.0..1.0)).collect();
        let a = DMatrix::from_row_slice(3, 3, &m);
        let cov = &a * a.transpose() + DMatrix::identity(3, 3) * 0.5;
        let mu: Vec<f64> = (0..3).map(|_| r.random_range(-1.0..1.0)).collect();
        let x: Vec<f64> = (0..3).map(|_| r.random_range(-2.0..2.0)).collect();
        let g = GaussianModel::new(mu.clone(), cov.clone()).map_err(|e| e.to_string())?;
        let c = |i: usize, j: usize| cov[(i, j)];
        let det = c(0, 0) * (c(1, 1) * c(2, 2) - c(1, 2) * c(2, 1)) - c(0, 1) * (c(1, 0) * c(2, 2) - c(1, 2) * c(2, 0))
            + c(0, 2) * (c(1, 0) * c(2, 1) - c(1, 1) * c(2, 0));
        let mut inv = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                inv[i][j] = (c(r0, c0) * c(r1, c1) - c(r0, c1) * c(r1, c0)) / det;
            }
        }
        let dx: Vec<f64> = x.iter().zip(&mu).map(|(a, b)| a - b).collect();
        let mut maha = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                maha += dx[i] * inv[i][j] * dx[j];
            }
        }
        let naive = -0.5 * (3.0 * (2.0 * std::f64::consts::PI).ln() + det.ln() + maha);
        let err = (g.log_density(&x) - naive).abs();
        if err > 1e-10 {
            return Err(format!("case {case}: log-density {} vs naive {naive}", g.log_density(&x)));
        }
    }
    Ok("gaussian: covariance matches brute force, 100 log-densities match the naive formula".into())
}

pub fn run_all() -> Check {
    let checks: [fn() -> Check; 6] = [
        incremental_mean,
        arm_kinematics,
        knapsack_repair,
        em_against_grid,
        elitist_selection,
        gaussian_moments,
    ];
    let mut lines = Vec::new();
    for c in checks {
        lines.push(c()?);
    }
    Ok(lines.join("; "))
}

// ------------------------------------------------------------- invariants

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn finish(name: &str, cases: u32, result: Result<(), proptest::test_runner::TestError<impl std::fmt::Debug>>) -> Check {
    result.map(|_| format!("{name}: {cases} cases")).map_err(|e| format!("{name}: {e}"))
}

fn random_bernoulli(d: usize, seed: u64) -> SearchModel {
    let mut r = rng(seed);
    SearchModel::Bernoulli(BernoulliModel::from_probs((0..d).map(|_| r.random_range(0.05..0.95)).collect()).unwrap())
}

fn random_pop(task: &dyn Task, n: usize, seed: u64) -> Population {
    let mut r = rng(seed);
    let space = task.space();
    let genotypes = (0..n).map(|_| streo::ea::random_genotype(space, &mut r)).collect();
    streo::evaluate(task, genotypes, WriteBack::Lamarckian).unwrap()
}

/// Simplex, monotone incumbent and source-support monotonicity over a run
/// of similarity steps.
pub fn similarity_invariants(cases: u32) -> Check {
    let strategy = (1usize..80, 2usize..30, any::<u64>(), 0.001f64..1.0, 0.0f64..=1.0, 1e-5f64..1.0);
    let result = runner(cases).run(&strategy, |(sources, n, seed, temperature, learning_rate, neutralization)| {
        let d = 8;
        let task = gen_knapsack(d, Correlation::Uc, CapacityKind::Ac, seed).unwrap();
        let models: Vec<SearchModel> = (0..sources).map(|k| random_bernoulli(d, seed ^ k as u64)).collect();
        let hp = HyperParams {
            temperature,
            learning_rate,
            neutralization,
            transfer_interval: 2,
        };
        let mut state = init_state(sources + 1, &task, &hp).unwrap();
        let pop = random_pop(&task, n, seed);
        let mut r = rng(seed);
        let mut incumbent = f64::NEG_INFINITY;
        let mut previous: Option<Vec<f64>> = None;
        for _ in 0..6 {
            similarity_step(&mut state, &models, &pop, pop.mean_fitness(), &task, n, &hp, WriteBack::Lamarckian, &mut r)
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            let w = &state.weights;
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12, "sum {}", w.iter().sum::<f64>());
            prop_assert!(w.iter().all(|v| *v >= 0.0));
            prop_assert!(state.incumbent >= incumbent);
            incumbent = state.incumbent;
            if let Some(p) = &previous {
                for s in 0..sources {
                    prop_assert!(!(p[s] == 0.0 && w[s] > 0.0), "source {s} revived");
                }
            }
            previous = Some(w.clone());
        }
        Ok(())
    });
    finish("similarity step invariants", cases, result)
}

pub fn allocation_invariants(cases: u32) -> Check {
    let strategy = (prop::collection::vec(prop_oneof![Just(0.0), 1e-9f64..1.0], 1..60), 0usize..40);
    let result = runner(cases).run(&strategy, |(raw, extra)| {
        let total: f64 = raw.iter().sum();
        prop_assume!(total > 0.0);
        let w: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let positive = w.iter().filter(|v| **v > 0.0).count();
        let n = positive + extra;
        let counts = allocate_samples(&w, n).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(counts.iter().sum::<usize>(), n);
        for (c, v) in counts.iter().zip(&w) {
            prop_assert_eq!(*c >= 1, *v > 0.0);
        }
        Ok(())
    });
    finish("allocation invariants", cases, result)
}

pub fn knapsack_invariants(cases: u32) -> Check {
    let strategy = (1usize..120, 0usize..3, any::<bool>(), any::<u64>());
    let result = runner(cases).run(&strategy, |(d, corr, average, seed)| {
        let corr = [Correlation::Uc, Correlation::Wc, Correlation::Sc][corr];
        let cap = if average { CapacityKind::Ac } else { CapacityKind::Rc };
        let k = gen_knapsack(d, corr, cap, seed).unwrap();
        for (v, w) in k.values().iter().zip(k.weights()) {
            prop_assert!((1.0..=10.0).contains(w));
            match corr {
                Correlation::Uc => prop_assert!((1.0..=10.0).contains(v)),
                Correlation::Wc => prop_assert!(*v > 0.0 && (v - w).abs() <= 5.0 + 1e-12),
                Correlation::Sc => prop_assert!((v - w - 5.0).abs() < 1e-12),
            }
        }
        let expected = if average { 0.5 * k.weights().iter().sum::<f64>() } else { 20.0 };
        prop_assert!((k.capacity() - expected).abs() < 1e-9);
        Ok(())
    });
    finish("knapsack category invariants", cases, result)
}

pub fn arm_fitness_range(cases: u32) -> Check {
    let strategy = (1usize..30, 1e-3f64..=std::f64::consts::SQRT_2, 1e-3f64..=1.0, any::<u64>());
    let result = runner(cases).run(&strategy, |(d, length, max_angle, seed)| {
        let arm = ArmTask::new(length, max_angle, d).unwrap();
        let mut r = rng(seed);
        for _ in 0..20 {
            let alpha: Vec<f64> = (0..d).map(|_| r.random()).collect();
            let f = arm.fitness(&alpha);
            prop_assert!((-2.0 * std::f64::consts::SQRT_2..=0.0).contains(&f), "{f}");
        }
        Ok(())
    });
    finish("arm fitness range", cases, result)
}

fn small_run_config(mode: TransferMode) -> EaConfig {
    EaConfig {
        population_size: 10,
        max_evaluations: 200,
        transfer: mode,
        ..EaConfig::default()
    }
}

/// Best-so-far never drops, and a fixed seed reproduces a run bit for bit.
pub fn run_invariants_for(cases: u32) -> Check {
    let strategy = (0usize..4, any::<u64>(), any::<bool>());
    let result = runner(cases).run(&strategy, |(mode, seed, binary)| {
        let mode = TransferMode::ALL[mode];
        let cfg = small_run_config(mode);
        let task: Box<dyn Task> = if binary {
            Box::new(gen_knapsack(8, Correlation::Uc, CapacityKind::Ac, seed).unwrap())
        } else {
            Box::new(ArmTask::new(std::f64::consts::SQRT_2, 1.0, 4).unwrap())
        };
        let sources: Vec<SearchModel> = if mode == TransferMode::None {
            vec![]
        } else if binary {
            (0..3).map(|k| random_bernoulli(8, seed.wrapping_add(k))).collect()
        } else {
            let mut r = rng(seed);
            (0..3)
                .map(|_| {
                    let mean = (0..4).map(|_| r.random()).collect();
                    SearchModel::Gaussian(GaussianModel::new(mean, DMatrix::identity(4, 4) * 0.01).unwrap())
                })
                .collect()
        };
        let a = run(task.as_ref(), &sources, &cfg, &RngHandle::new(seed)).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let b = run(task.as_ref(), &sources, &cfg, &RngHandle::new(seed)).map_err(|e| TestCaseError::fail(e.to_string()))?;
        for w in a.generations.windows(2) {
            prop_assert!(w[1].best_fitness >= w[0].best_fitness);
        }
        prop_assert_eq!(&a.final_population, &b.final_population);
        prop_assert_eq!(a.best_fitness.to_bits(), b.best_fitness.to_bits());
        let strip = |r: &streo::ea::RunRecord| {
            r.generations
                .iter()
                .map(|g| (g.evaluations, g.best_fitness.to_bits(), g.mean_fitness.to_bits()))
                .collect::<Vec<_>>()
        };
        prop_assert_eq!(strip(&a), strip(&b));
        let weights = |r: &streo::ea::RunRecord| r.transfers.iter().map(|t| t.weights.clone()).collect::<Vec<_>>();
        prop_assert_eq!(weights(&a), weights(&b));
        Ok(())
    });
    finish("elitism and reproducibility", cases, result)
}

pub fn run_invariants(cases: u32) -> Check {
    let checks: [fn(u32) -> Check; 5] = [
        similarity_invariants,
        allocation_invariants,
        knapsack_invariants,
        arm_fitness_range,
        run_invariants_for,
    ];
    let mut lines = Vec::new();
    for c in checks {
        lines.push(c(cases)?);
    }
    Ok(lines.join("; "))
}
