//! Structured families with known optima: one-vs-many (OVM), trade-off AV
//! (TOAV) and trade-off CC (TOCC).
//!
//! All projects in these families cost one unit and the budget is the number
//! of units that may be spent, so every analytic identity is an integer one.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rng_for;
use crate::model::PBInstance;

/// Which parameter ranges to draw from. `Test` widens the ranges so the
/// voter counts cover the larger test-time populations.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
pub enum FamilyRegime {
    #[default]
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OvmParams {
    /// Number of equally priced small projects that exhaust the budget.
    pub small_projects: usize,
    /// Approvers per small project, drawn from a pool of
    /// `small_projects * approvers` voters.
    pub approvers: usize,
    /// Fresh voters approving the single big project.
    pub big_supporters: usize,
}

impl OvmParams {
    pub fn num_voters(&self) -> usize {
        self.small_projects * self.approvers + self.big_supporters
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToavParams {
    /// Number of groups, projects per group and projects that fit.
    pub m: usize,
    /// Size of every group but the first.
    pub x: usize,
    /// Extra voters of the first group.
    pub x_extra: usize,
}

impl ToavParams {
    pub fn num_voters(&self) -> usize {
        self.m * self.x + self.x_extra
    }

    pub fn optimal_welfare(&self) -> u64 {
        (self.m * (self.x + self.x_extra)) as u64
    }

    pub fn optimal_representation(&self) -> u64 {
        (self.m * self.x + self.x_extra) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToccParams {
    pub n1: usize,
    pub n2: usize,
}

impl ToccParams {
    pub fn num_voters(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn optimal_welfare(&self) -> u64 {
        (self.n1 * self.n2) as u64
    }

    pub fn optimal_representation(&self) -> u64 {
        (self.n1 + self.n2) as u64
    }

    /// Welfare of the representation-optimal bundles.
    pub fn welfare_at_representation_optimum(&self) -> u64 {
        (self.n2 * (self.n1 - 1) + self.n1) as u64
    }
}

pub fn draw_ovm_params(regime: FamilyRegime, seed: u64) -> OvmParams {
    let mut rng = rng_for(seed, "ovm");
    let small_projects = rng.random_range(2..=5);
    match regime {
        FamilyRegime::Train => OvmParams {
            small_projects,
            approvers: 100,
            big_supporters: rng.random_range(3..=409),
        },
        FamilyRegime::Test => OvmParams {
            small_projects,
            approvers: rng.random_range(20..=5000),
            big_supporters: rng.random_range(21..=25_000),
        },
    }
}

/// Builds an OVM instance: small projects are indices `0..p`, the big
/// project is last. The first `p * approvers` voters form the pool.
pub fn build_ovm(params: OvmParams, seed: u64) -> PBInstance {
    let mut rng = rng_for(seed, "ovm-ballots");
    let p = params.small_projects;
    let pool = p * params.approvers;
    let mut approvals = vec![Vec::new(); pool];
    for project in 0..p {
        for v in sample(&mut rng, pool, params.approvers) {
            approvals[v].push(project);
        }
    }
    approvals.extend((0..params.big_supporters).map(|_| vec![p]));
    let mut costs = vec![1.0; p];
    costs.push(p as f64);
    PBInstance::new(approvals, costs, p as f64).expect("valid OVM instance")
}

pub fn gen_ovm_with(regime: FamilyRegime, seed: u64) -> (OvmParams, PBInstance) {
    let params = draw_ovm_params(regime, seed);
    (params, build_ovm(params, seed))
}

pub fn gen_ovm(seed: u64) -> PBInstance {
    gen_ovm_with(FamilyRegime::Train, seed).1
}

pub fn draw_toav_params(regime: FamilyRegime, seed: u64) -> ToavParams {
    let mut rng = rng_for(seed, "toav");
    let m = rng.random_range(3..=7);
    match regime {
        FamilyRegime::Train => ToavParams {
            m,
            x: rng.random_range(5..=20),
            x_extra: rng.random_range(1..=100),
        },
        FamilyRegime::Test => ToavParams {
            m,
            x: rng.random_range(20..=128),
            x_extra: rng.random_range(6..=104),
        },
    }
}

/// Group `g` (the first one holding `x + x_extra` voters) approves projects
/// `g*m .. g*m + m`; `m` of the `m^2` unit-cost projects fit.
pub fn build_toav(params: ToavParams) -> PBInstance {
    let ToavParams { m, x, x_extra } = params;
    let mut approvals = Vec::with_capacity(params.num_voters());
    for g in 0..m {
        let size = if g == 0 { x + x_extra } else { x };
        let block: Vec<usize> = (g * m..g * m + m).collect();
        approvals.extend(std::iter::repeat_n(block, size));
    }
    PBInstance::new(approvals, vec![1.0; m * m], m as f64).expect("valid TOAV instance")
}

pub fn gen_toav_with(regime: FamilyRegime, seed: u64) -> (ToavParams, PBInstance) {
    let params = draw_toav_params(regime, seed);
    (params, build_toav(params))
}

pub fn gen_toav(seed: u64) -> PBInstance {
    gen_toav_with(FamilyRegime::Train, seed).1
}

pub fn draw_tocc_params(regime: FamilyRegime, seed: u64) -> ToccParams {
    let mut rng = rng_for(seed, "tocc");
    let n1 = match regime {
        FamilyRegime::Train => rng.random_range(3..=24),
        FamilyRegime::Test => rng.random_range(3..=40),
    };
    ToccParams {
        n1,
        n2: rng.random_range(n1..=2 * n1),
    }
}

/// The first `n2` voters approve projects `0..n1`; the other `n1` voters all
/// approve project `n1`; projects `n1+1 .. 2*n1` get no approvals. `n1` of
/// the `2*n1` unit-cost projects fit.
pub fn build_tocc(params: ToccParams) -> PBInstance {
    let ToccParams { n1, n2 } = params;
    let mut approvals: Vec<Vec<usize>> = std::iter::repeat_n((0..n1).collect(), n2).collect();
    approvals.extend(std::iter::repeat_n(vec![n1], n1));
    PBInstance::new(approvals, vec![1.0; 2 * n1], n1 as f64).expect("valid TOCC instance")
}

pub fn gen_tocc_with(regime: FamilyRegime, seed: u64) -> (ToccParams, PBInstance) {
    let params = draw_tocc_params(regime, seed);
    (params, build_tocc(params))
}

pub fn gen_tocc(seed: u64) -> PBInstance {
    gen_tocc_with(FamilyRegime::Train, seed).1
}
