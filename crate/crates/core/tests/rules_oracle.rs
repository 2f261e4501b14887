mod common;

use common::{brute_force, objectives, random_instance};
use pbkit::model::{feasible, social_welfare, PBInstance};
use pbkit::rules::{
    enumerate_optima, solve_exact, solve_exact_with, solve_random, solve_sequential, Objective,
    SolveError, SolverLimits, TieCount,
};

#[test]
fn exact_matches_brute_force() {
    for seed in 0..150 {
        let inst = random_instance(seed, 10, 30);
        for obj in objectives() {
            let oracle = brute_force(&inst, obj);
            let got = solve_exact(&inst, obj).unwrap();
            assert!(got.proven_optimal);
            assert!(feasible(&inst, &got.bundle).unwrap());
            assert!(
                (got.value - oracle.optimum).abs() <= 1e-9 * oracle.optimum.max(1.0),
                "seed {seed} {obj}: {} vs {}",
                got.value,
                oracle.optimum
            );
            assert_eq!(&got.bundle, oracle.smallest(), "seed {seed} {obj}");
        }
    }
}

#[test]
fn tie_counts_match_brute_force() {
    for seed in 1000..1120 {
        let inst = random_instance(seed, 9, 25);
        for obj in objectives() {
            let oracle = brute_force(&inst, obj);
            let report = enumerate_optima(&inst, obj, 10_000, 4, SolverLimits::default()).unwrap();
            assert_eq!(
                report.count,
                TieCount::Exact(oracle.maximal_optima.len() as u64),
                "seed {seed} {obj}"
            );
            let k = oracle.maximal_optima.len().min(4);
            assert_eq!(report.sample_bundles.len(), k);
            let mut distinct = report.sample_bundles.clone();
            distinct.sort_by(|a, b| a.projects().cmp(b.projects()));
            distinct.dedup();
            assert_eq!(distinct.len(), k);
            assert!(distinct.iter().all(|b| oracle.maximal_optima.contains(b)));
            for b in &report.sample_bundles {
                let v = obj.evaluate(&inst, b).unwrap();
                assert!((v - report.optimum_value).abs() <= 1e-9 * v.max(1.0));
            }
        }
    }
}

#[test]
fn cap_saturates() {
    // six unit projects, each approved once, three fit: C(6,3) = 20 optima
    let inst = PBInstance::new((0..6).map(|p| vec![p]).collect(), vec![1.0; 6], 3.0).unwrap();
    let full = enumerate_optima(&inst, Objective::Av, 100, 0, SolverLimits::default()).unwrap();
    assert_eq!(full.count, TieCount::Exact(20));
    let capped = enumerate_optima(&inst, Objective::Av, 7, 3, SolverLimits::default()).unwrap();
    assert_eq!(capped.count, TieCount::AtLeast(7));
    assert!(capped.count.saturated());
    assert_eq!(capped.sample_bundles.len(), 3);
}

#[test]
fn node_limit_is_an_error_not_an_answer() {
    let inst = random_instance(7, 12, 40);
    let tiny = SolverLimits { max_nodes: 1 };
    assert!(matches!(
        solve_exact_with(&inst, Objective::Pav, tiny),
        Err(SolveError::NodeLimit { nodes: 1 })
    ));
}

#[test]
fn heuristics_are_feasible_and_reproducible() {
    for seed in 0..200 {
        let inst = random_instance(seed, 12, 40);
        for obj in objectives() {
            let b = solve_sequential(&inst, obj);
            assert!(feasible(&inst, &b).unwrap());
            // nothing approved and affordable is left out
            let rest = inst.budget() - inst.bundle_cost(&b).unwrap();
            let counts = inst.approval_counts();
            for (p, &count) in counts.iter().enumerate() {
                if !b.contains(p) && count > 0 && obj == Objective::Av {
                    assert!(inst.cost(p) > rest + 1e-9 * inst.budget());
                }
            }
        }
        let r = solve_random(&inst, seed);
        assert!(feasible(&inst, &r).unwrap());
        assert_eq!(r, solve_random(&inst, seed));
        let exact = solve_exact(&inst, Objective::Av).unwrap();
        assert!(social_welfare(&inst, &r).unwrap() as f64 <= exact.value);
    }
}

#[test]
fn weighted_endpoints_are_av_and_cc() {
    for seed in 0..60 {
        let inst = random_instance(seed, 12, 40);
        let av = solve_exact(&inst, Objective::Av).unwrap();
        let w1 = solve_exact(&inst, Objective::weighted(1.0).unwrap()).unwrap();
        assert_eq!(av.bundle, w1.bundle);
        assert_eq!(av.value, w1.value);
        let cc = solve_exact(&inst, Objective::Cc).unwrap();
        let w0 = solve_exact(&inst, Objective::weighted(0.0).unwrap()).unwrap();
        assert_eq!(cc.bundle, w0.bundle);
        assert_eq!(cc.value, w0.value);
    }
}
