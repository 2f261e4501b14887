//! Participatory budgeting instances, bundles and the scores every rule is
//! measured by.
//!
//! Costs are kept in the instance's own currency units. Budget comparisons go
//! through [`within_budget`], which allows a relative slack of
//! [`BUDGET_TOLERANCE`] so that instances whose costs were normalized by the
//! budget (and therefore carry rounding error) keep the same feasible sets.

use std::fmt;

use thiserror::Error;

/// Relative slack applied to every budget comparison.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

/// Tolerance for comparing real-valued objective scores (PAV, weighted).
pub const SCORE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("project index {index} out of range for {num_projects} projects")]
    ProjectIndex { index: usize, num_projects: usize },
    #[error("voter {voter} approves project {index}, but there are only {num_projects} projects")]
    ApprovalIndex {
        voter: usize,
        index: usize,
        num_projects: usize,
    },
    #[error("project {index} has non-positive or non-finite cost {cost}")]
    Cost { index: usize, cost: f64 },
    #[error("budget must be positive and finite, got {0}")]
    Budget(f64),
    #[error("instance has no projects")]
    NoProjects,
    #[error("no project fits the budget {budget}")]
    NothingAffordable { budget: f64 },
    #[error("score vector has length {got}, expected {expected}")]
    ScoreLength { got: usize, expected: usize },
    #[error("score {value} at position {index} is outside [0, 1]")]
    ScoreRange { index: usize, value: f64 },
}

/// `true` when `total` does not exceed `budget`, up to [`BUDGET_TOLERANCE`].
#[inline]
pub fn within_budget(total: f64, budget: f64) -> bool {
    total <= budget * (1.0 + BUDGET_TOLERANCE)
}

/// A participatory budgeting instance: approval ballots, project costs and a
/// budget.
#[derive(Debug, Clone, PartialEq)]
pub struct PBInstance {
    approvals: Vec<Vec<usize>>,
    costs: Vec<f64>,
    budget: f64,
}

impl PBInstance {
    /// Builds an instance. Approval lists are sorted and deduplicated; voters
    /// with empty ballots are kept.
    pub fn new(
        approvals: Vec<Vec<usize>>,
        costs: Vec<f64>,
        budget: f64,
    ) -> Result<Self, ModelError> {
        if !(budget.is_finite() && budget > 0.0) {
            return Err(ModelError::Budget(budget));
        }
        if costs.is_empty() {
            return Err(ModelError::NoProjects);
        }
        for (index, &cost) in costs.iter().enumerate() {
            if !(cost.is_finite() && cost > 0.0) {
                return Err(ModelError::Cost { index, cost });
            }
        }
        if !costs.iter().any(|&c| within_budget(c, budget)) {
            return Err(ModelError::NothingAffordable { budget });
        }
        let num_projects = costs.len();
        let mut approvals = approvals;
        for (voter, ballot) in approvals.iter_mut().enumerate() {
            ballot.sort_unstable();
            ballot.dedup();
            if let Some(&index) = ballot.last() {
                if index >= num_projects {
                    return Err(ModelError::ApprovalIndex {
                        voter,
                        index,
                        num_projects,
                    });
                }
            }
        }
        Ok(Self {
            approvals,
            costs,
            budget,
        })
    }

    pub fn num_voters(&self) -> usize {
        self.approvals.len()
    }

    pub fn num_projects(&self) -> usize {
        self.costs.len()
    }

    /// Sorted approval set of every voter.
    pub fn approvals(&self) -> &[Vec<usize>] {
        &self.approvals
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn cost(&self, project: usize) -> f64 {
        self.costs[project]
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// Number of approvals each project received.
    pub fn approval_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_projects()];
        for ballot in &self.approvals {
            for &p in ballot {
                counts[p] += 1;
            }
        }
        counts
    }

    /// Voters approving each project.
    pub fn approvers(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_projects()];
        for (voter, ballot) in self.approvals.iter().enumerate() {
            for &p in ballot {
                out[p].push(voter);
            }
        }
        out
    }

    /// Same instance with costs and budget divided by the budget.
    pub fn normalized(&self) -> PBInstance {
        PBInstance {
            approvals: self.approvals.clone(),
            costs: self.costs.iter().map(|c| c / self.budget).collect(),
            budget: 1.0,
        }
    }

    /// Applies a voter permutation: voter `i` of the result is voter
    /// `order[i]` of `self`.
    pub fn permute_voters(&self, order: &[usize]) -> PBInstance {
        PBInstance {
            approvals: order.iter().map(|&v| self.approvals[v].clone()).collect(),
            costs: self.costs.clone(),
            budget: self.budget,
        }
    }

    /// Relabels projects: project `p` of `self` becomes `relabel[p]`.
    pub fn relabel_projects(&self, relabel: &[usize]) -> Result<PBInstance, ModelError> {
        let mut costs = vec![0.0; self.num_projects()];
        for (p, &q) in relabel.iter().enumerate() {
            costs[q] = self.costs[p];
        }
        let approvals = self
            .approvals
            .iter()
            .map(|b| b.iter().map(|&p| relabel[p]).collect())
            .collect();
        PBInstance::new(approvals, costs, self.budget)
    }

    fn membership(&self, bundle: &Bundle) -> Result<Vec<bool>, ModelError> {
        bundle.validate(self)?;
        let mut funded = vec![false; self.num_projects()];
        for &p in bundle.projects() {
            funded[p] = true;
        }
        Ok(funded)
    }

    /// `|A_i ∩ B|` for every voter.
    pub fn funded_counts(&self, bundle: &Bundle) -> Result<Vec<usize>, ModelError> {
        let funded = self.membership(bundle)?;
        Ok(self
            .approvals
            .iter()
            .map(|ballot| ballot.iter().filter(|&&p| funded[p]).count())
            .collect())
    }

    pub fn bundle_cost(&self, bundle: &Bundle) -> Result<f64, ModelError> {
        bundle.validate(self)?;
        Ok(bundle.projects().iter().map(|&p| self.costs[p]).sum())
    }
}

/// A set of funded projects, stored as a sorted list of distinct indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bundle {
    selected: Vec<usize>,
}

impl Bundle {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn projects(&self) -> &[usize] {
        &self.selected
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn contains(&self, project: usize) -> bool {
        self.selected.binary_search(&project).is_ok()
    }

    pub fn validate(&self, instance: &PBInstance) -> Result<(), ModelError> {
        match self.selected.last() {
            Some(&index) if index >= instance.num_projects() => Err(ModelError::ProjectIndex {
                index,
                num_projects: instance.num_projects(),
            }),
            _ => Ok(()),
        }
    }

    /// 0/1 indicator of length `num_projects`.
    pub fn indicator(&self, num_projects: usize) -> Vec<f64> {
        let mut v = vec![0.0; num_projects];
        for &p in &self.selected {
            if p < num_projects {
                v[p] = 1.0;
            }
        }
        v
    }
}

impl FromIterator<usize> for Bundle {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut selected: Vec<usize> = iter.into_iter().collect();
        selected.sort_unstable();
        selected.dedup();
        Bundle { selected }
    }
}

impl From<Vec<usize>> for Bundle {
    fn from(v: Vec<usize>) -> Self {
        v.into_iter().collect()
    }
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.selected.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

/// Per-project scores in `[0, 1]`, e.g. the output of a learned rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    scores: Vec<f64>,
}

impl ScoreVector {
    pub fn new(scores: Vec<f64>) -> Result<Self, ModelError> {
        for (index, &value) in scores.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(ModelError::ScoreRange { index, value });
            }
        }
        Ok(Self { scores })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

pub fn feasible(instance: &PBInstance, bundle: &Bundle) -> Result<bool, ModelError> {
    Ok(within_budget(
        instance.bundle_cost(bundle)?,
        instance.budget(),
    ))
}

/// `SW(A, B) = sum_i |A_i ∩ B|`. Feasibility is not required.
pub fn social_welfare(instance: &PBInstance, bundle: &Bundle) -> Result<u64, ModelError> {
    Ok(instance
        .funded_counts(bundle)?
        .into_iter()
        .map(|k| k as u64)
        .sum())
}

/// `REP(A, B) = sum_i min(1, |A_i ∩ B|)`.
pub fn representation(instance: &PBInstance, bundle: &Bundle) -> Result<u64, ModelError> {
    Ok(instance
        .funded_counts(bundle)?
        .into_iter()
        .filter(|&k| k > 0)
        .count() as u64)
}

/// Harmonic numbers `H_0 ..= H_max` in double precision.
pub fn harmonic_prefix(max: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(max + 1);
    let mut acc = 0.0;
    h.push(acc);
    for k in 1..=max {
        acc += 1.0 / k as f64;
        h.push(acc);
    }
    h
}

/// `SC_PAV(A, B) = sum_i H_{|A_i ∩ B|}`, accumulated in `f64` from
/// precomputed harmonic prefix sums.
pub fn pav_score(instance: &PBInstance, bundle: &Bundle) -> Result<f64, ModelError> {
    let counts = instance.funded_counts(bundle)?;
    let h = harmonic_prefix(bundle.len());
    Ok(counts.into_iter().map(|k| h[k]).sum())
}

/// Goes through projects by decreasing score (lower index first on ties) and
/// funds each one that still fits. Skipped projects are not revisited.
pub fn greedy_fill_from_scores(
    instance: &PBInstance,
    scores: &ScoreVector,
) -> Result<Bundle, ModelError> {
    if scores.len() != instance.num_projects() {
        return Err(ModelError::ScoreLength {
            got: scores.len(),
            expected: instance.num_projects(),
        });
    }
    let s = scores.as_slice();
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    let mut spent = 0.0;
    let mut selected = Vec::new();
    for p in order {
        let cost = instance.cost(p);
        if within_budget(spent + cost, instance.budget()) {
            spent += cost;
            selected.push(p);
        }
    }
    Ok(selected.into_iter().collect())
}
