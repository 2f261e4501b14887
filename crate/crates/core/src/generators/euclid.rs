//! Two-dimensional Euclidean instances: voters and projects are points in the
//! unit square and each voter approves its `k_v` closest projects.

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use super::{rng_for, SizeRegime};
use crate::model::{within_budget, PBInstance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CostModel {
    /// Uniform on `[100, 100000]`.
    Uniform,
    /// `min_cost + Exp(mean - min_cost)`.
    Exponential { min_cost: f64, mean: f64 },
    /// `N(budget / 2, budget / 5)`, truncated below at 1.
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CoordModel {
    Uniform,
    /// `N(0.5, sigma)` per axis, truncated to `[0, 1]`.
    Gaussian { sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum KModel {
    /// `k_v ~ U{1, ..., floor(0.75 m)}`.
    Uniform,
    /// `round(N(m / scale, 3))`, clamped to `[1, m]`.
    Normal { scale: f64 },
}

pub const EXP_MIN_COSTS: [f64; 4] = [10.0, 20.0, 500.0, 1000.0];
pub const EXP_MEANS: [f64; 3] = [10000.0, 15000.0, 30000.0];
pub const SIGMAS: [f64; 3] = [0.1, 0.2, 0.3];
pub const K_SCALES: [f64; 3] = [3.0, 2.5, 2.0];

/// Sampling configuration. `None` sub-models are drawn per instance, each
/// option with equal probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EucParams {
    pub project_range: (usize, usize),
    pub budget_range: (u64, u64),
    pub cost_model: Option<CostModel>,
    pub voter_coords: Option<CoordModel>,
    pub project_coords: Option<CoordModel>,
    pub k_model: Option<KModel>,
}

impl Default for EucParams {
    fn default() -> Self {
        Self {
            project_range: (20, 50),
            budget_range: (10_000, 250_000),
            cost_model: None,
            voter_coords: None,
            project_coords: None,
            k_model: None,
        }
    }
}

/// An instance together with the geometry it was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct EucSample {
    pub instance: PBInstance,
    pub voter_xy: Vec<[f64; 2]>,
    pub project_xy: Vec<[f64; 2]>,
    /// Sub-models actually used.
    pub cost_model: CostModel,
    pub voter_coords: CoordModel,
    pub project_coords: CoordModel,
    pub k_model: KModel,
}

fn draw_cost_model<R: Rng>(rng: &mut R) -> CostModel {
    match rng.random_range(0..3) {
        0 => CostModel::Uniform,
        1 => CostModel::Exponential {
            min_cost: EXP_MIN_COSTS[rng.random_range(0..EXP_MIN_COSTS.len())],
            mean: EXP_MEANS[rng.random_range(0..EXP_MEANS.len())],
        },
        _ => CostModel::Normal,
    }
}

fn draw_coord_model<R: Rng>(rng: &mut R) -> CoordModel {
    if rng.random_bool(0.5) {
        CoordModel::Uniform
    } else {
        CoordModel::Gaussian {
            sigma: SIGMAS[rng.random_range(0..SIGMAS.len())],
        }
    }
}

fn draw_k_model<R: Rng>(rng: &mut R) -> KModel {
    if rng.random_bool(0.5) {
        KModel::Uniform
    } else {
        KModel::Normal {
            scale: K_SCALES[rng.random_range(0..K_SCALES.len())],
        }
    }
}

fn draw_point<R: Rng>(rng: &mut R, model: CoordModel) -> [f64; 2] {
    match model {
        CoordModel::Uniform => [rng.random::<f64>(), rng.random::<f64>()],
        CoordModel::Gaussian { sigma } => {
            let normal = Normal::new(0.5, sigma).expect("positive sigma");
            let mut axis = || loop {
                let v: f64 = normal.sample(rng);
                if (0.0..=1.0).contains(&v) {
                    break v;
                }
            };
            [axis(), axis()]
        }
    }
}

fn draw_cost<R: Rng>(rng: &mut R, model: CostModel, budget: f64) -> f64 {
    let raw = match model {
        CostModel::Uniform => rng.random_range(100.0..=100_000.0),
        CostModel::Exponential { min_cost, mean } => {
            let exp = Exp::new(1.0 / (mean - min_cost)).expect("mean above min cost");
            min_cost + exp.sample(rng)
        }
        CostModel::Normal => {
            let normal = Normal::new(budget / 2.0, budget / 5.0).expect("positive budget");
            loop {
                let v: f64 = normal.sample(rng);
                if v >= 1.0 {
                    break v;
                }
            }
        }
    };
    raw.round().max(1.0)
}

fn draw_k<R: Rng>(rng: &mut R, model: KModel, m: usize) -> usize {
    match model {
        KModel::Uniform => {
            let hi = ((0.75 * m as f64).floor() as usize).max(1);
            rng.random_range(1..=hi)
        }
        KModel::Normal { scale } => {
            let normal = Normal::new(m as f64 / scale, 3.0).expect("positive sd");
            let v: f64 = normal.sample(rng);
            (v.round().max(1.0) as usize).min(m)
        }
    }
}

/// Indices of the `k` projects nearest to `at`, ties by index.
pub fn nearest_projects(at: [f64; 2], projects: &[[f64; 2]], k: usize) -> Vec<usize> {
    let d2 = |q: &[f64; 2]| (q[0] - at[0]).powi(2) + (q[1] - at[1]).powi(2);
    let mut order: Vec<usize> = (0..projects.len()).collect();
    order.sort_by(|&a, &b| d2(&projects[a]).total_cmp(&d2(&projects[b])).then(a.cmp(&b)));
    order.truncate(k);
    order.sort_unstable();
    order
}

/// Euclidean instance with its geometry. Pure function of the arguments.
pub fn gen_euc_sample(params: &EucParams, regime: SizeRegime, seed: u64) -> EucSample {
    let mut rng = rng_for(seed, "euc");
    let (vlo, vhi) = regime.voter_range();
    let n = rng.random_range(vlo..=vhi);
    let m = rng.random_range(params.project_range.0..=params.project_range.1);
    let budget = rng.random_range(params.budget_range.0..=params.budget_range.1) as f64;

    let cost_model = params.cost_model.unwrap_or_else(|| draw_cost_model(&mut rng));
    let voter_coords = params.voter_coords.unwrap_or_else(|| draw_coord_model(&mut rng));
    let project_coords = params
        .project_coords
        .unwrap_or_else(|| draw_coord_model(&mut rng));
    let k_model = params.k_model.unwrap_or_else(|| draw_k_model(&mut rng));

    // redraw costs until some project is affordable
    let costs = loop {
        let costs: Vec<f64> = (0..m)
            .map(|_| draw_cost(&mut rng, cost_model, budget))
            .collect();
        if costs.iter().any(|&c| within_budget(c, budget)) {
            break costs;
        }
    };
    let project_xy: Vec<[f64; 2]> = (0..m).map(|_| draw_point(&mut rng, project_coords)).collect();
    let voter_xy: Vec<[f64; 2]> = (0..n).map(|_| draw_point(&mut rng, voter_coords)).collect();
    let approvals = voter_xy
        .iter()
        .map(|&v| {
            let k = draw_k(&mut rng, k_model, m);
            nearest_projects(v, &project_xy, k)
        })
        .collect();
    let instance =
        PBInstance::new(approvals, costs, budget).expect("generator produces valid instances");
    EucSample {
        instance,
        voter_xy,
        project_xy,
        cost_model,
        voter_coords,
        project_coords,
        k_model,
    }
}

pub fn gen_euc(params: &EucParams, regime: SizeRegime, seed: u64) -> PBInstance {
    gen_euc_sample(params, regime, seed).instance
}
