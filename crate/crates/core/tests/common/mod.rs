//! Exhaustive reference solver and small random instances shared by the
//! integration tests.

#![allow(dead_code)]

use pbkit::model::{Bundle, PBInstance};
use pbkit::rules::Objective;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Oracle {
    pub optimum: f64,
    /// Maximal optimal bundles over approved projects, lexicographic order.
    pub maximal_optima: Vec<Bundle>,
}

impl Oracle {
    pub fn smallest(&self) -> &Bundle {
        &self.maximal_optima[0]
    }
}

fn tolerance(objective: Objective, v: f64) -> f64 {
    if objective.is_integral() {
        0.5
    } else {
        1e-9 * v.abs().max(1.0)
    }
}

/// Tries all `2^m` subsets.
pub fn brute_force(inst: &PBInstance, objective: Objective) -> Oracle {
    let m = inst.num_projects();
    assert!(m <= 16, "oracle limited to small instances");
    let counts = inst.approval_counts();
    let approved: Vec<usize> = (0..m).filter(|&p| counts[p] > 0).collect();
    let fits = |total: f64| total <= inst.budget() * (1.0 + 1e-9);

    let mut optimum = 0.0f64;
    for mask in 0u32..(1 << m) {
        let b: Bundle = (0..m).filter(|&p| mask >> p & 1 == 1).collect();
        if fits(inst.bundle_cost(&b).unwrap()) {
            optimum = optimum.max(objective.evaluate(inst, &b).unwrap());
        }
    }

    let mut maximal_optima = Vec::new();
    for mask in 0u32..(1 << approved.len()) {
        let b: Bundle = approved
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &p)| p)
            .collect();
        let cost = inst.bundle_cost(&b).unwrap();
        if !fits(cost) {
            continue;
        }
        let maximal = approved
            .iter()
            .all(|&p| b.contains(p) || !fits(cost + inst.cost(p)));
        if !maximal {
            continue;
        }
        let v = objective.evaluate(inst, &b).unwrap();
        if v >= optimum - tolerance(objective, optimum) {
            maximal_optima.push(b);
        }
    }
    maximal_optima.sort_by(|a, b| a.projects().cmp(b.projects()));
    Oracle {
        optimum,
        maximal_optima,
    }
}

/// Random instance with up to `max_m` projects and `max_n` voters. Small
/// integer costs make ties common; some seeds use fractional costs.
pub fn random_instance(seed: u64, max_m: usize, max_n: usize) -> PBInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(1..=max_m);
    let n = rng.random_range(1..=max_n);
    let fractional = rng.random_bool(0.3);
    let costs: Vec<f64> = (0..m)
        .map(|_| {
            if fractional {
                rng.random_range(0.5..10.0)
            } else {
                rng.random_range(1..=8) as f64
            }
        })
        .collect();
    let total: f64 = costs.iter().sum();
    let budget = (total * rng.random_range(0.15..0.7)).max(costs[0]).ceil();
    let density = rng.random_range(0.05..0.5);
    let approvals = (0..n)
        .map(|_| (0..m).filter(|_| rng.random_bool(density)).collect())
        .collect();
    PBInstance::new(approvals, costs, budget).unwrap()
}

pub fn objectives() -> [Objective; 5] {
    [
        Objective::Av,
        Objective::Cc,
        Objective::Pav,
        Objective::weighted(0.3).unwrap(),
        Objective::weighted(0.75).unwrap(),
    ]
}
