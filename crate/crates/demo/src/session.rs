use pbkit::generators::{gen_euc_sample, EucParams, EucSample, SizeRegime};
use pbkit::model::{representation, social_welfare, Bundle};
use pbkit::rules::{solve_exact_with, solve_random, solve_sequential, Objective, SolverLimits};
use serde::Serialize;

/// Search budget per exact solve, small enough to keep the page responsive.
const MAX_NODES: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Layout {
    pub voters: Vec<[f64; 2]>,
    pub projects: Vec<[f64; 2]>,
    pub costs: Vec<f64>,
    pub budget: f64,
    pub approvals: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solved {
    pub bundle: Vec<usize>,
    pub cost: f64,
    pub welfare: u64,
    pub representation: u64,
    pub welfare_ratio: f64,
    pub representation_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub label: String,
    /// Set for the weighted points only.
    pub p: Option<f64>,
    pub welfare_ratio: f64,
    pub representation_ratio: f64,
}

pub struct Session {
    sample: EucSample,
    seed: u64,
    opt_sw: u64,
    opt_rep: u64,
}

fn limits() -> SolverLimits {
    SolverLimits {
        max_nodes: MAX_NODES,
    }
}

impl Session {
    pub fn new(seed: u64) -> Self {
        let sample = gen_euc_sample(&EucParams::default(), SizeRegime::Small, seed);
        let opt = |obj| {
            solve_exact_with(&sample.instance, obj, limits())
                .map(|r| r.value.round() as u64)
                .unwrap_or(0)
        };
        let (opt_sw, opt_rep) = (opt(Objective::Av), opt(Objective::Cc));
        Self {
            sample,
            seed,
            opt_sw,
            opt_rep,
        }
    }

    pub fn layout(&self) -> Layout {
        let inst = &self.sample.instance;
        Layout {
            voters: self.sample.voter_xy.clone(),
            projects: self.sample.project_xy.clone(),
            costs: inst.costs().to_vec(),
            budget: inst.budget(),
            approvals: inst.approvals().to_vec(),
        }
    }

    fn ratio(value: u64, opt: u64) -> f64 {
        if opt == 0 {
            1.0
        } else {
            value as f64 / opt as f64
        }
    }

    fn describe(&self, bundle: &Bundle) -> Solved {
        let inst = &self.sample.instance;
        let welfare = social_welfare(inst, bundle).expect("solver bundles index the instance");
        let rep = representation(inst, bundle).expect("solver bundles index the instance");
        Solved {
            bundle: bundle.projects().to_vec(),
            cost: inst.bundle_cost(bundle).expect("solver bundles index the instance"),
            welfare,
            representation: rep,
            welfare_ratio: Self::ratio(welfare, self.opt_sw),
            representation_ratio: Self::ratio(rep, self.opt_rep),
        }
    }

    fn run(&self, objective: Objective, method: &str) -> Result<Bundle, String> {
        let inst = &self.sample.instance;
        match method {
            "exact" => solve_exact_with(inst, objective, limits())
                .map(|r| r.bundle)
                .map_err(|e| e.to_string()),
            "sequential" => Ok(solve_sequential(inst, objective)),
            "random" => Ok(solve_random(inst, self.seed)),
            other => Err(format!("unknown method {other:?}")),
        }
    }

    pub fn solve(&self, rule: &str, p: f64, method: &str) -> Result<Solved, String> {
        let objective = match rule {
            "av" => Objective::Av,
            "cc" => Objective::Cc,
            "pav" => Objective::Pav,
            "weighted" => Objective::weighted(p).map_err(|e| e.to_string())?,
            other => return Err(format!("unknown rule {other:?}")),
        };
        self.run(objective, method).map(|b| self.describe(&b))
    }

    pub fn tradeoff(&self, steps: usize) -> Result<Vec<CurvePoint>, String> {
        let steps = steps.max(1);
        let point = |label: String, p: Option<f64>, s: Solved| CurvePoint {
            label,
            p,
            welfare_ratio: s.welfare_ratio,
            representation_ratio: s.representation_ratio,
        };
        let mut out = Vec::with_capacity(steps + 4);
        for i in 0..=steps {
            let p = i as f64 / steps as f64;
            let s = self.solve("weighted", p, "exact")?;
            out.push(point(format!("p={p:.2}"), Some(p), s));
        }
        out.push(point("PAV".into(), None, self.solve("pav", 0.0, "exact")?));
        out.push(point("sequential AV".into(), None, self.solve("av", 0.0, "sequential")?));
        out.push(point("sequential CC".into(), None, self.solve("cc", 0.0, "sequential")?));
        out.push(point("random".into(), None, self.solve("av", 0.0, "random")?));
        Ok(out)
    }
}
