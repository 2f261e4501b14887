//! Aggregation rules: exact optimizers, tie enumeration and the sequential and
//! random baselines.
//!
//! Every objective handled here is a Thiele-style score
//! `f(B) = sum_i sum_{k=1}^{|A_i ∩ B|} w_k` with non-increasing weights `w_k`:
//!
//! | objective     | `w_1` | `w_k`, `k >= 2` |
//! |---------------|-------|-----------------|
//! | AV            | 1     | 1               |
//! | CC            | 1     | 0               |
//! | PAV           | 1     | 1/k             |
//! | Weighted(p)   | 1     | p               |
//!
//! so `Weighted(p) = p * SW + (1 - p) * REP`.

mod exact;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    pav_score, representation, social_welfare, within_budget, Bundle, ModelError, PBInstance,
};

pub use exact::{
    enumerate_optima, solve_exact, solve_exact_with, OptimalResult, SolveError, SolverLimits,
    TieCount, TieReport,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuleError {
    #[error("weight p must lie in [0, 1], got {0}")]
    WeightRange(f64),
    #[error("unknown rule {0:?} (expected av, cc, pav or weighted:<p>)")]
    Unknown(String),
}

/// A rule used as a label for training data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Rule {
    Av,
    Cc,
    Pav,
}

impl Rule {
    pub const ALL: [Rule; 3] = [Rule::Av, Rule::Cc, Rule::Pav];

    pub fn objective(self) -> Objective {
        match self {
            Rule::Av => Objective::Av,
            Rule::Cc => Objective::Cc,
            Rule::Pav => Objective::Pav,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Av => "AV",
            Rule::Cc => "CC",
            Rule::Pav => "PAV",
        })
    }
}

impl FromStr for Rule {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "av" => Ok(Rule::Av),
            "cc" => Ok(Rule::Cc),
            "pav" => Ok(Rule::Pav),
            _ => Err(RuleError::Unknown(s.to_string())),
        }
    }
}

/// The score an aggregation rule maximizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    Av,
    Cc,
    Pav,
    /// `p * SW + (1 - p) * REP`.
    Weighted(f64),
}

impl Objective {
    pub fn weighted(p: f64) -> Result<Self, RuleError> {
        if (0.0..=1.0).contains(&p) {
            Ok(Objective::Weighted(p))
        } else {
            Err(RuleError::WeightRange(p))
        }
    }

    /// Weight of a voter's `k`-th funded approved project (`k >= 1`).
    #[inline]
    pub fn marginal_weight(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        match *self {
            Objective::Av => 1.0,
            Objective::Cc => {
                if k == 1 {
                    1.0
                } else {
                    0.0
                }
            }
            Objective::Pav => 1.0 / k as f64,
            Objective::Weighted(p) => {
                if k == 1 {
                    1.0
                } else {
                    p
                }
            }
        }
    }

    /// AV and CC scores are integers; the others are compared with
    /// [`crate::model::SCORE_TOLERANCE`].
    pub fn is_integral(&self) -> bool {
        matches!(self, Objective::Av | Objective::Cc)
    }

    pub fn evaluate(&self, instance: &PBInstance, bundle: &Bundle) -> Result<f64, ModelError> {
        Ok(match *self {
            Objective::Av => social_welfare(instance, bundle)? as f64,
            Objective::Cc => representation(instance, bundle)? as f64,
            Objective::Pav => pav_score(instance, bundle)?,
            Objective::Weighted(p) => {
                let sw = social_welfare(instance, bundle)? as f64;
                let rep = representation(instance, bundle)? as f64;
                p * sw + (1.0 - p) * rep
            }
        })
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Av => f.write_str("av"),
            Objective::Cc => f.write_str("cc"),
            Objective::Pav => f.write_str("pav"),
            Objective::Weighted(p) => write!(f, "weighted:{p}"),
        }
    }
}

impl FromStr for Objective {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        if let Some(p) = lower.strip_prefix("weighted:") {
            let p: f64 = p.parse().map_err(|_| RuleError::Unknown(s.to_string()))?;
            return Objective::weighted(p);
        }
        Ok(lower.parse::<Rule>()?.objective())
    }
}

impl From<Rule> for Objective {
    fn from(r: Rule) -> Self {
        r.objective()
    }
}

/// Repeatedly funds the affordable project with the largest marginal gain
/// in `objective` (plain gain, not divided by cost; lower index on ties)
/// until nothing affordable is left.
pub fn solve_sequential(instance: &PBInstance, objective: Objective) -> Bundle {
    let approvers = instance.approvers();
    let mut counts = vec![0usize; instance.num_voters()];
    let mut taken = vec![false; instance.num_projects()];
    let mut spent = 0.0;
    loop {
        let mut best: Option<(usize, f64)> = None;
        for p in 0..instance.num_projects() {
            if taken[p] || !within_budget(spent + instance.cost(p), instance.budget()) {
                continue;
            }
            let gain: f64 = approvers[p]
                .iter()
                .map(|&v| objective.marginal_weight(counts[v] + 1))
                .sum();
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((p, gain));
            }
        }
        let Some((p, _)) = best else { break };
        taken[p] = true;
        spent += instance.cost(p);
        for &v in &approvers[p] {
            counts[v] += 1;
        }
    }
    (0..instance.num_projects()).filter(|&p| taken[p]).collect()
}

/// Shuffles the projects with a seeded RNG and funds each one that still
/// fits.
pub fn solve_random(instance: &PBInstance, seed: u64) -> Bundle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..instance.num_projects()).collect();
    order.shuffle(&mut rng);
    let mut spent = 0.0;
    let mut selected = Vec::new();
    for p in order {
        if within_budget(spent + instance.cost(p), instance.budget()) {
            spent += instance.cost(p);
            selected.push(p);
        }
    }
    selected.into_iter().collect()
}
