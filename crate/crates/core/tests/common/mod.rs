//! Fixtures shared by the integration targets.

#![allow(dead_code)]

use streo::benchmarks::{
    build_source_archive, expand_groups, gen_knapsack, ArchiveStrategy, ArmTask, CapacityKind, Correlation,
    KnapsackInstance, SourceArchive, SourceGroup,
};
use streo::ea::EaConfig;
use streo::RngHandle;

pub mod oracles;

pub const KNAPSACK_DIM: usize = 100;

/// The KP_uc_ac target used by the knapsack scenarios.
pub fn knapsack_target(seed: u64) -> KnapsackInstance {
    gen_knapsack(KNAPSACK_DIM, Correlation::Uc, CapacityKind::Ac, seed).unwrap()
}

/// `related` KP_sc_ac sources plus `unrelated` spread evenly over KP_uc_rc,
/// KP_wc_rc and KP_sc_rc (earlier families take the remainder).
pub fn knapsack_groups(related: usize, unrelated: usize) -> Vec<SourceGroup> {
    let families = [Correlation::Uc, Correlation::Wc, Correlation::Sc];
    let mut groups = vec![SourceGroup::Knapsack {
        correlation: Correlation::Sc,
        capacity: CapacityKind::Ac,
        count: related,
        related: true,
    }];
    for (k, c) in families.into_iter().enumerate() {
        let count = unrelated / 3 + usize::from(k < unrelated % 3);
        groups.push(SourceGroup::Knapsack {
            correlation: c,
            capacity: CapacityKind::Rc,
            count,
            related: false,
        });
    }
    groups
}

pub fn knapsack_archive(related: usize, unrelated: usize, seed: u64) -> SourceArchive {
    let rng = RngHandle::new(seed);
    let specs = expand_groups(&knapsack_groups(related, unrelated), KNAPSACK_DIM, &rng).unwrap();
    build_source_archive(&specs, 5000, ArchiveStrategy::Cga, &EaConfig::default(), &rng).unwrap()
}

pub fn arm_target(joints: usize) -> ArmTask {
    ArmTask::new(std::f64::consts::SQRT_2, 1.0, joints).unwrap()
}

pub fn arm_archive(related: usize, unrelated: usize, joints: usize, strategy: ArchiveStrategy, seed: u64) -> SourceArchive {
    let rng = RngHandle::new(seed);
    let groups = [SourceGroup::related_arms(related), SourceGroup::unrelated_arms(unrelated)];
    let specs = expand_groups(&groups, joints, &rng).unwrap();
    build_source_archive(&specs, 5000, strategy, &EaConfig::default(), &rng).unwrap()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Coefficient of determination of the least-squares line through `(x, y)`.
pub fn affine_r2(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    let slope = sxy / sxx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - (my + slope * (a - mx))).powi(2))
        .sum();
    1.0 - ss_res / syy
}
