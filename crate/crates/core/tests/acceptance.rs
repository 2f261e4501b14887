//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if a criterion that could be checked failed.
//!
//! Criteria needing inputs that are not in the repository (real Pabulib
//! files, looked up under `PB_DATA_DIR`) print FAIL with the reason but do
//! not change the exit status.

mod common;

use std::path::PathBuf;
use std::time::Instant;

use common::{brute_force, random_instance};
use pbkit::generators::{
    derive_seed, gen_toav_with, gen_tocc_with, EucParams, Family, FamilyRegime, SizeRegime,
};
use pbkit::io::{
    import_dir, read_records, write_records, ExchangeRecord, UnknownProjects,
    DEFAULT_PROJECT_RANGE,
};
use pbkit::metrics::{dataset_point, jaccard, ratio_pair, rmse_distance, EvalPoint, RatioPair};
use pbkit::model::{feasible, representation, social_welfare, Bundle, PBInstance};
use pbkit::rules::{
    enumerate_optima, solve_exact, solve_random, solve_sequential, Objective, SolverLimits,
    TieCount,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

const SEED: u64 = 20_240_601;

enum Outcome {
    Pass(String),
    Fail(String),
    /// Could not be checked in this environment.
    Unverifiable(String),
}

type Check = Result<String, String>;

fn euc_small(stream: u64, count: usize) -> Vec<PBInstance> {
    (0..count as u64)
        .map(|i| Family::Euc(SizeRegime::Small).instance(&EucParams::default(), derive_seed(SEED, stream, i)))
        .collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    let objectives = [
        Objective::Av,
        Objective::Cc,
        Objective::Pav,
        Objective::weighted(0.3).unwrap(),
        Objective::weighted(0.8).unwrap(),
    ];
    let mut worst = 0.0f64;
    for i in 0..200 {
        let inst = random_instance(derive_seed(SEED, 1, i), 12, 40);
        for obj in objectives {
            let oracle = brute_force(&inst, obj);
            let got = solve_exact(&inst, obj).map_err(|e| format!("instance {i} {obj}: {e}"))?;
            let diff = (got.value - oracle.optimum).abs();
            worst = worst.max(diff);
            let ok = if obj.is_integral() {
                diff == 0.0
            } else {
                diff <= 1e-9 * oracle.optimum.max(1.0)
            };
            ensure(ok, || format!("instance {i} {obj}: {} vs oracle {}", got.value, oracle.optimum))?;
            ensure(feasible(&inst, &got.bundle).unwrap(), || format!("instance {i} {obj}: infeasible"))?;
            ensure(&got.bundle == oracle.smallest(), || {
                format!("instance {i} {obj}: tie-break {} vs {}", got.bundle, oracle.smallest())
            })?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 300.0, || format!("took {secs:.1}s"))?;
    Ok(format!("200 instances x 5 objectives, max deviation {worst:.1e}, {secs:.1}s"))
}

fn family_identities() -> Check {
    let mut tie_checked = 0;
    for i in 0..100u64 {
        let regime = if i % 2 == 0 { FamilyRegime::Train } else { FamilyRegime::Test };
        let (t, inst) = gen_toav_with(regime, derive_seed(SEED, 2, i));
        let av = solve_exact(&inst, Objective::Av).map_err(|e| e.to_string())?;
        let cc = solve_exact(&inst, Objective::Cc).map_err(|e| e.to_string())?;
        ensure(av.value == t.optimal_welfare() as f64, || format!("TOAV {t:?}: AV {}", av.value))?;
        ensure(cc.value == t.optimal_representation() as f64, || format!("TOAV {t:?}: CC {}", cc.value))?;
        if t.m <= 4 {
            let ties = enumerate_optima(&inst, Objective::Cc, 1_000_000, 0, SolverLimits::default())
                .map_err(|e| e.to_string())?;
            let expect = (t.m as u64).pow(t.m as u32);
            ensure(ties.count == TieCount::Exact(expect), || format!("TOAV {t:?}: CC ties {:?}", ties.count))?;
            tie_checked += 1;
        }

        let (c, inst) = gen_tocc_with(regime, derive_seed(SEED, 3, i));
        let av = solve_exact(&inst, Objective::Av).map_err(|e| e.to_string())?;
        let cc = solve_exact(&inst, Objective::Cc).map_err(|e| e.to_string())?;
        ensure(av.value == c.optimal_welfare() as f64, || format!("TOCC {c:?}: AV {}", av.value))?;
        ensure(cc.value == c.optimal_representation() as f64, || format!("TOCC {c:?}: CC {}", cc.value))?;
        let sw = social_welfare(&inst, &cc.bundle).unwrap();
        ensure(sw == c.welfare_at_representation_optimum(), || format!("TOCC {c:?}: SW at CC optimum {sw}"))?;
        let ties = enumerate_optima(&inst, Objective::Cc, 1_000_000, 0, SolverLimits::default())
            .map_err(|e| e.to_string())?;
        ensure(ties.count == TieCount::Exact(c.n1 as u64), || format!("TOCC {c:?}: CC ties {:?}", ties.count))?;
    }
    Ok(format!("100 TOAV + 100 TOCC, m^m tie count checked on {tie_checked} TOAV instances with m <= 4"))
}

fn weighted_curve() -> Check {
    let instances = euc_small(4, 200);
    let ps: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let mut sw = vec![0.0; ps.len()];
    let mut rep = vec![0.0; ps.len()];
    let (mut pav_sw, mut pav_rep) = (0.0, 0.0);
    for (i, inst) in instances.iter().enumerate() {
        let av = solve_exact(inst, Objective::Av).map_err(|e| e.to_string())?.value;
        let cc = solve_exact(inst, Objective::Cc).map_err(|e| e.to_string())?.value;
        for (k, &p) in ps.iter().enumerate() {
            let b = solve_exact(inst, Objective::weighted(p).unwrap())
                .map_err(|e| format!("instance {i} p={p}: {e}"))?
                .bundle;
            let s = social_welfare(inst, &b).unwrap() as f64;
            let r = representation(inst, &b).unwrap() as f64;
            if k == 0 {
                ensure(r == cc, || format!("instance {i}: REP at p=0 is {r}, CC optimum {cc}"))?;
            }
            if k == ps.len() - 1 {
                ensure(s == av, || format!("instance {i}: SW at p=1 is {s}, AV optimum {av}"))?;
            }
            sw[k] += s / av;
            rep[k] += r / cc;
        }
        let b = solve_exact(inst, Objective::Pav).map_err(|e| e.to_string())?.bundle;
        pav_sw += social_welfare(inst, &b).unwrap() as f64 / av;
        pav_rep += representation(inst, &b).unwrap() as f64 / cc;
    }
    let n = instances.len() as f64;
    for k in 1..ps.len() {
        ensure(sw[k] >= sw[k - 1] - 1e-12, || format!("mean SW drops between p={} and p={}", ps[k - 1], ps[k]))?;
        ensure(rep[k] <= rep[k - 1] + 1e-12, || format!("mean REP rises between p={} and p={}", ps[k - 1], ps[k]))?;
    }
    let (pav_sw, pav_rep) = (pav_sw / n, pav_rep / n);
    let nearest = (0..ps.len())
        .min_by(|&a, &b| {
            let d = |k: usize| (sw[k] / n - pav_sw).powi(2) + (rep[k] / n - pav_rep).powi(2);
            d(a).total_cmp(&d(b))
        })
        .unwrap();
    Ok(format!(
        "SW ratio {:.3} -> {:.3}, REP ratio {:.3} -> {:.3}; PAV at ({pav_sw:.3}, {pav_rep:.3}), nearest p = {:.1} [informational]",
        sw[0] / n,
        sw[10] / n,
        rep[0] / n,
        rep[10] / n,
        ps[nearest]
    ))
}

fn random_gap() -> Check {
    let instances = euc_small(5, 500);
    let (mut random, mut seq) = (0.0, 0.0);
    for (i, inst) in instances.iter().enumerate() {
        let opt = solve_exact(inst, Objective::Av).map_err(|e| e.to_string())?.value;
        let r = solve_random(inst, derive_seed(SEED, 6, i as u64));
        let s = solve_sequential(inst, Objective::Av);
        random += social_welfare(inst, &r).unwrap() as f64 / opt;
        seq += social_welfare(inst, &s).unwrap() as f64 / opt;
    }
    let n = instances.len() as f64;
    let (random, seq) = (random / n, seq / n);
    ensure((0.45..=0.62).contains(&random), || format!("random mean welfare ratio {random:.3}"))?;
    ensure(seq >= random + 0.10, || format!("sequential {seq:.3} vs random {random:.3}"))?;
    Ok(format!("random {random:.3}, sequential AV {seq:.3} (500 instances)"))
}

fn tie_profile() -> Check {
    const CAP: u64 = 10_000;
    let instances = euc_small(7, 200);
    let (mut av, mut cc, mut saturated) = (0u64, 0u64, 0);
    for inst in &instances {
        let a = enumerate_optima(inst, Objective::Av, CAP, 0, SolverLimits::default()).map_err(|e| e.to_string())?;
        let c = enumerate_optima(inst, Objective::Cc, CAP, 0, SolverLimits::default()).map_err(|e| e.to_string())?;
        av += a.count.value();
        cc += c.count.value();
        saturated += c.count.saturated() as usize;
    }
    let n = instances.len() as f64;
    let (av, cc) = (av as f64 / n, cc as f64 / n);
    ensure((1.0..=1.8).contains(&av), || format!("mean AV ties {av:.2}"))?;
    ensure(cc >= 10.0, || format!("mean CC ties {cc:.1}"))?;
    Ok(format!(
        "mean AV ties {av:.2}; mean CC ties >= {cc:.1} ({saturated} of 200 counts capped at {CAP})"
    ))
}

fn point(id: &str, w: f64, r: f64) -> EvalPoint {
    EvalPoint {
        dataset_id: id.into(),
        mean_welfare_ratio: w,
        mean_representation_ratio: r,
        count: 1,
    }
}

fn metrics_algebra() -> Check {
    let pred = [point("a", 0.9, 1.0), point("b", 0.8, 0.9)];
    let truth = [point("a", 1.0, 1.0), point("b", 1.0, 0.9)];
    let d = rmse_distance(&pred, &truth).map_err(|e| e.to_string())?;
    let expect = (0.05f64 / 2.0).sqrt();
    ensure((d.welfare_rmse - expect).abs() < 1e-9, || format!("welfare rmse {}", d.welfare_rmse))?;
    ensure(d.representation_rmse.abs() < 1e-9, || format!("rep rmse {}", d.representation_rmse))?;
    ensure((d.total - 0.158).abs() < 1e-3, || format!("total {}", d.total))?;
    let p = dataset_point(
        "d",
        &[
            RatioPair { welfare_ratio: 1.0, representation_ratio: 1.0 },
            RatioPair { welfare_ratio: 0.5, representation_ratio: 0.5 },
        ],
    )
    .map_err(|e| e.to_string())?;
    ensure((p.mean_welfare_ratio, p.mean_representation_ratio) == (0.75, 0.75), || format!("{p:?}"))?;
    ensure((jaccard(&vec![1, 2].into(), &vec![2, 3].into()) - 1.0 / 3.0).abs() < 1e-12, || "jaccard".into())?;

    let mut runner = TestRunner::new(Config {
        cases: 500,
        failure_persistence: None,
        ..Config::default()
    });
    let pts = (1usize..10).prop_flat_map(|n| {
        (
            proptest::collection::vec((0.0f64..1.2, 0.0f64..1.0), n),
            proptest::collection::vec((0.0f64..1.2, 0.0f64..1.0), n),
        )
    });
    runner
        .run(&pts, |(a, b)| {
            let mk = |v: &[(f64, f64)]| -> Vec<EvalPoint> {
                v.iter().enumerate().map(|(i, &(w, r))| point(&format!("d{i}"), w, r)).collect()
            };
            let (a, b) = (mk(&a), mk(&b));
            let ab = rmse_distance(&a, &b).unwrap();
            let ba = rmse_distance(&b, &a).unwrap();
            prop_assert_eq!(ab.total, ab.welfare_rmse + ab.representation_rmse);
            prop_assert!((ab.total - ba.total).abs() < 1e-12);
            prop_assert_eq!(rmse_distance(&a, &a).unwrap().total, 0.0);
            prop_assert_eq!(ab.total == 0.0, a == b);
            Ok(())
        })
        .map_err(|e| format!("rmse property: {e}"))?;
    let sets = (
        proptest::collection::btree_set(0usize..15, 0..8),
        proptest::collection::btree_set(0usize..15, 0..8),
    );
    runner
        .run(&sets, |(x, y)| {
            let (a, b): (Bundle, Bundle) = (x.iter().copied().collect(), y.iter().copied().collect());
            let j = jaccard(&a, &b);
            prop_assert!((0.0..=1.0).contains(&j));
            prop_assert_eq!(j, jaccard(&b, &a));
            prop_assert_eq!(jaccard(&a, &a), 1.0);
            prop_assert_eq!(j == 1.0, x == y);
            Ok(())
        })
        .map_err(|e| format!("jaccard property: {e}"))?;
    runner
        .run(&(0u64..1_000_000), |seed| {
            let inst = random_instance(seed, 12, 40);
            let av = solve_exact(&inst, Objective::Av).unwrap();
            let cc = solve_exact(&inst, Objective::Cc).unwrap();
            if av.value == 0.0 {
                return Ok(());
            }
            let (sw, rep) = (av.value as u64, cc.value as u64);
            prop_assert_eq!(ratio_pair(&inst, &av.bundle, sw, rep).unwrap().welfare_ratio, 1.0);
            prop_assert_eq!(ratio_pair(&inst, &cc.bundle, sw, rep).unwrap().representation_ratio, 1.0);
            for b in [solve_random(&inst, seed), solve_sequential(&inst, Objective::Pav)] {
                let r = ratio_pair(&inst, &b, sw, rep).unwrap();
                prop_assert!(r.welfare_ratio <= 1.0 && r.representation_ratio <= 1.0);
            }
            Ok(())
        })
        .map_err(|e| format!("ratio property: {e}"))?;
    Ok("hand-computed RMSE to 1e-9; 3 x 500 property cases".into())
}

fn pabulib_fixtures() -> Check {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/pabulib");
    let imported = import_dir(&dir, UnknownProjects::Strict, DEFAULT_PROJECT_RANGE).map_err(|e| e.to_string())?;
    ensure(imported.errors.is_empty(), || format!("{:?}", imported.errors))?;
    ensure(imported.accepted.len() == 3, || format!("{} fixtures accepted", imported.accepted.len()))?;
    ensure(
        imported.filtered.iter().map(|f| f.1).collect::<Vec<_>>() == [60],
        || format!("filtered {:?}", imported.filtered),
    )?;
    let records: Vec<ExchangeRecord> = imported
        .accepted
        .iter()
        .map(|(p, f)| ExchangeRecord::from_instance(p.display().to_string(), &f.instance))
        .collect();
    let mut buf = Vec::new();
    write_records(&mut buf, &records).map_err(|e| e.to_string())?;
    let back = read_records(buf.as_slice()).map_err(|e| e.to_string())?;
    for ((_, file), rec) in imported.accepted.iter().zip(&back) {
        let inst = rec.to_instance().map_err(|e| e.to_string())?;
        ensure(inst == file.instance.normalized(), || format!("{} changed on round-trip", rec.id))?;
    }
    Ok("3 fixtures parsed and round-tripped, 60-project file filtered".into())
}

fn pabulib_real() -> Outcome {
    let Some(dir) = std::env::var_os("PB_DATA_DIR").map(PathBuf::from) else {
        return Outcome::Unverifiable("PB_DATA_DIR not set; no real Warsaw files available".into());
    };
    let imported = match import_dir(&dir, UnknownProjects::Strict, DEFAULT_PROJECT_RANGE) {
        Ok(i) => i,
        Err(e) => return Outcome::Unverifiable(format!("{}: {e}", dir.display())),
    };
    let warsaw = |p: &PathBuf| p.to_string_lossy().to_ascii_lowercase().contains("warszawa");
    let accepted = imported.accepted.iter().filter(|(p, _)| warsaw(p)).count();
    let failed: Vec<String> = imported.errors.iter().map(|e| e.to_string()).collect();
    if !failed.is_empty() {
        Outcome::Fail(format!("{} files failed: {}", failed.len(), failed.join("; ")))
    } else if accepted < 3 {
        Outcome::Unverifiable(format!("only {accepted} Warsaw files under {}", dir.display()))
    } else {
        Outcome::Pass(format!(
            "{accepted} Warsaw files accepted, {} filtered by project count",
            imported.filtered.len()
        ))
    }
}

fn main() {
    type Criterion = (&'static str, fn() -> Check);
    let checks: Vec<Criterion> = vec![
        ("oracle-equivalence", oracle_equivalence),
        ("family-identities", family_identities),
        ("weighted-curve", weighted_curve),
        ("random-baseline-gap", random_gap),
        ("tie-profile", tie_profile),
        ("metrics-algebra", metrics_algebra),
        ("pabulib-fixtures", pabulib_fixtures),
    ];
    let mut results: Vec<(&str, Outcome)> = checks
        .into_iter()
        .map(|(name, f)| {
            let outcome = match f() {
                Ok(msg) => Outcome::Pass(msg),
                Err(msg) => Outcome::Fail(msg),
            };
            (name, outcome)
        })
        .collect();
    results.push(("pabulib-warsaw", pabulib_real()));

    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Outcome::Pass(msg) => println!("PASS {name}: {msg}"),
            Outcome::Fail(msg) => {
                failed += 1;
                println!("FAIL {name}: {msg}");
            }
            Outcome::Unverifiable(msg) => println!("FAIL {name}: not verifiable here: {msg}"),
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
