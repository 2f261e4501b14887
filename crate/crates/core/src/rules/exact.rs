//! Branch and bound over include/exclude decisions.
//!
//! Voters with identical ballots are merged into weighted groups and projects
//! nobody approves are dropped: they add nothing to any objective, so no
//! reported bundle ever contains them. Every objective is monotone and
//! submodular, which gives the node bound
//!
//! `f(S ∪ T) <= f(S) + min(knapsack_LP(Δ(·|S)), sum_g cap_g)`
//!
//! where the first term is the fractional knapsack over current marginal
//! gains and `cap_g` is the most a voter group can still collect given how
//! many of its approved candidates could be funded together.
//!
//! Reported optima and counted ties are restricted to *maximal* bundles: no
//! approved project outside the bundle fits the leftover budget. Every
//! optimum extends to a maximal one, so the optimal value is unchanged.
//! Among maximal bundles the reported one is the lexicographically smallest
//! by sorted index sequence; since maximal bundles form an antichain, an
//! include-first search in index order meets it first.
//!
//! Searches are bounded by a node budget instead of wall-clock time so that
//! results, including failures, are reproducible.

use thiserror::Error;

use super::Objective;
use crate::model::{within_budget, Bundle, ModelError, PBInstance, SCORE_TOLERANCE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("optimality not proven within {nodes} search nodes")]
    NodeLimit { nodes: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverLimits {
    /// Search nodes allowed per phase before giving up.
    pub max_nodes: u64,
}

impl Default for SolverLimits {
    fn default() -> Self {
        Self {
            max_nodes: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalResult {
    pub bundle: Bundle,
    pub value: f64,
    pub proven_optimal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieCount {
    Exact(u64),
    /// Counting stopped at the cap.
    AtLeast(u64),
}

impl TieCount {
    pub fn value(self) -> u64 {
        match self {
            TieCount::Exact(n) | TieCount::AtLeast(n) => n,
        }
    }

    pub fn saturated(self) -> bool {
        matches!(self, TieCount::AtLeast(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TieReport {
    pub count: TieCount,
    pub sample_bundles: Vec<Bundle>,
    pub optimum_value: f64,
}

/// Exact optimum with default limits.
pub fn solve_exact(instance: &PBInstance, objective: Objective) -> Result<OptimalResult, SolveError> {
    solve_exact_with(instance, objective, SolverLimits::default())
}

pub fn solve_exact_with(
    instance: &PBInstance,
    objective: Objective,
    limits: SolverLimits,
) -> Result<OptimalResult, SolveError> {
    let problem = Problem::new(instance, objective);
    let best = problem.optimum(limits)?;
    let bundle = problem.first_maximal_at_least(best, limits)?;
    let value = objective.evaluate(instance, &bundle)?;
    Ok(OptimalResult {
        bundle,
        value,
        proven_optimal: true,
    })
}

/// Counts distinct maximal bundles attaining the optimum, stopping at `cap`,
/// and keeps up to `sample_size` of them.
pub fn enumerate_optima(
    instance: &PBInstance,
    objective: Objective,
    cap: u64,
    sample_size: usize,
    limits: SolverLimits,
) -> Result<TieReport, SolveError> {
    let cap = cap.max(1);
    let problem = Problem::new(instance, objective);
    let best = problem.optimum(limits)?;
    let mut search = Search::new(
        &problem,
        Mode::Count {
            target: best,
            cap,
            sample_size,
        },
        limits,
    );
    search.run()?;
    let count = if search.found >= cap {
        TieCount::AtLeast(cap)
    } else {
        TieCount::Exact(search.found)
    };
    Ok(TieReport {
        count,
        sample_bundles: search.samples,
        optimum_value: best,
    })
}

struct Item {
    project: usize,
    cost: f64,
    groups: Vec<usize>,
}

struct Problem {
    objective: Objective,
    /// `weight[k]` is `w_k`; `prefix[k] = w_1 + ... + w_k`.
    weight: Vec<f64>,
    prefix: Vec<f64>,
    group_size: Vec<f64>,
    items: Vec<Item>,
    budget: f64,
}

impl Problem {
    fn new(instance: &PBInstance, objective: Objective) -> Self {
        let budget = instance.budget();
        let counts = instance.approval_counts();
        // candidate projects, kept in index order
        let mut local = vec![usize::MAX; instance.num_projects()];
        let mut projects = Vec::new();
        for p in 0..instance.num_projects() {
            if counts[p] > 0 && within_budget(instance.cost(p), budget) {
                local[p] = projects.len();
                projects.push(p);
            }
        }

        let mut ballots: Vec<Vec<usize>> = instance
            .approvals()
            .iter()
            .map(|b| {
                b.iter()
                    .filter_map(|&p| (local[p] != usize::MAX).then_some(local[p]))
                    .collect::<Vec<_>>()
            })
            .filter(|b| !b.is_empty())
            .collect();
        ballots.sort();
        let mut group_size: Vec<f64> = Vec::new();
        let mut items: Vec<Item> = projects
            .iter()
            .map(|&p| Item {
                project: p,
                cost: instance.cost(p),
                groups: Vec::new(),
            })
            .collect();
        let mut prev: Option<&Vec<usize>> = None;
        for ballot in &ballots {
            if prev == Some(ballot) {
                *group_size.last_mut().unwrap() += 1.0;
                continue;
            }
            let g = group_size.len();
            group_size.push(1.0);
            for &j in ballot {
                items[j].groups.push(g);
            }
            prev = Some(ballot);
        }

        let depth = items.len();
        let mut weight = vec![0.0; depth + 2];
        let mut prefix = vec![0.0; depth + 2];
        for k in 1..depth + 2 {
            weight[k] = objective.marginal_weight(k);
            prefix[k] = prefix[k - 1] + weight[k];
        }
        Problem {
            objective,
            weight,
            prefix,
            group_size,
            items,
            budget,
        }
    }

    fn tolerance(&self, target: f64) -> f64 {
        if self.objective.is_integral() {
            0.5
        } else {
            SCORE_TOLERANCE * target.abs().max(1.0)
        }
    }

    /// Optimal objective value.
    fn optimum(&self, limits: SolverLimits) -> Result<f64, SolveError> {
        let mut search = Search::new(self, Mode::Optimize, limits);
        search.best = self.greedy_value();
        search.run()?;
        Ok(search.best)
    }

    /// Value of the plain and cost-normalized greedy, whichever is better;
    /// used as the starting incumbent.
    fn greedy_value(&self) -> f64 {
        let mut best: f64 = 0.0;
        for by_ratio in [false, true] {
            let mut counts = vec![0usize; self.group_size.len()];
            let mut taken = vec![false; self.items.len()];
            let mut spent = 0.0;
            let mut value = 0.0;
            loop {
                let mut pick: Option<(usize, f64, f64)> = None;
                for (j, item) in self.items.iter().enumerate() {
                    if taken[j] || !within_budget(spent + item.cost, self.budget) {
                        continue;
                    }
                    let gain = self.gain(item, &counts);
                    let key = if by_ratio { gain / item.cost } else { gain };
                    if pick.is_none_or(|(_, k, _)| key > k) {
                        pick = Some((j, key, gain));
                    }
                }
                let Some((j, _, gain)) = pick else { break };
                taken[j] = true;
                spent += self.items[j].cost;
                value += gain;
                for &g in &self.items[j].groups {
                    counts[g] += 1;
                }
            }
            best = best.max(value);
        }
        best
    }

    #[inline]
    fn gain(&self, item: &Item, counts: &[usize]) -> f64 {
        item.groups
            .iter()
            .map(|&g| self.group_size[g] * self.weight[counts[g] + 1])
            .sum()
    }

    fn first_maximal_at_least(&self, target: f64, limits: SolverLimits) -> Result<Bundle, SolveError> {
        let mut search = Search::new(self, Mode::First { target }, limits);
        search.run()?;
        // the optimum is attained by some maximal bundle, so this is reached
        Ok(search.samples.pop().unwrap_or_default())
    }
}

#[derive(Clone, Copy)]
enum Mode {
    /// Largest value of any feasible bundle; order by gain/cost.
    Optimize,
    /// First maximal bundle in index order with value >= target.
    First { target: f64 },
    /// All maximal bundles with value >= target.
    Count {
        target: f64,
        cap: u64,
        sample_size: usize,
    },
}

struct Search<'a> {
    problem: &'a Problem,
    mode: Mode,
    limits: SolverLimits,
    nodes: u64,
    counts: Vec<usize>,
    chosen: Vec<usize>,
    spent: f64,
    value: f64,
    /// Candidates explicitly left out (maximal modes only).
    excluded: Vec<usize>,
    best: f64,
    found: u64,
    samples: Vec<Bundle>,
    done: bool,
}

impl<'a> Search<'a> {
    fn new(problem: &'a Problem, mode: Mode, limits: SolverLimits) -> Self {
        Search {
            problem,
            mode,
            limits,
            nodes: 0,
            counts: vec![0; problem.group_size.len()],
            chosen: Vec::new(),
            spent: 0.0,
            value: 0.0,
            excluded: Vec::new(),
            best: 0.0,
            found: 0,
            samples: Vec::new(),
            done: false,
        }
    }

    fn run(&mut self) -> Result<(), SolveError> {
        let all: Vec<usize> = (0..self.problem.items.len()).collect();
        self.visit(all)
    }

    fn fits(&self, cost: f64) -> bool {
        within_budget(self.spent + cost, self.problem.budget)
    }

    fn bundle(&self) -> Bundle {
        self.chosen
            .iter()
            .map(|&j| self.problem.items[j].project)
            .collect()
    }

    fn visit(&mut self, candidates: Vec<usize>) -> Result<(), SolveError> {
        self.nodes += 1;
        if self.nodes > self.limits.max_nodes {
            return Err(SolveError::NodeLimit {
                nodes: self.limits.max_nodes,
            });
        }
        let p = self.problem;
        if matches!(self.mode, Mode::Optimize) && self.value > self.best {
            // every node is itself a feasible bundle
            self.best = self.value;
        }
        let mut cands: Vec<usize> = candidates
            .into_iter()
            .filter(|&j| self.fits(p.items[j].cost))
            .collect();

        let maximal = !matches!(self.mode, Mode::Optimize);
        if maximal {
            // an excluded project that still fits after funding every
            // candidate makes every leaf below non-maximal
            let floor = self.spent + cands.iter().map(|&j| p.items[j].cost).sum::<f64>();
            if self
                .excluded
                .iter()
                .any(|&e| within_budget(floor + p.items[e].cost, p.budget))
            {
                return Ok(());
            }
        }

        // marginal gains and per-group candidate counts
        let mut gains: Vec<f64> = Vec::with_capacity(cands.len());
        let mut open = vec![0usize; p.group_size.len()];
        for &j in &cands {
            gains.push(p.gain(&p.items[j], &self.counts));
            for &g in &p.items[j].groups {
                open[g] += 1;
            }
        }
        if matches!(self.mode, Mode::Optimize) {
            let mut k = 0;
            for i in 0..cands.len() {
                if gains[i] > 0.0 {
                    cands[k] = cands[i];
                    gains[k] = gains[i];
                    k += 1;
                }
            }
            cands.truncate(k);
            gains.truncate(k);
        }

        if cands.is_empty() {
            self.leaf();
            return Ok(());
        }

        let bound = self.value + self.bound(&cands, &gains, &open);
        match self.mode {
            Mode::Optimize => {
                if bound <= self.best + p.tolerance(self.best) {
                    return Ok(());
                }
            }
            Mode::First { target } | Mode::Count { target, .. } => {
                if bound < target - p.tolerance(target) {
                    return Ok(());
                }
            }
        }

        let pos = match self.mode {
            Mode::First { .. } => 0,
            _ => {
                let mut pos = 0;
                let mut key = f64::NEG_INFINITY;
                for (i, &j) in cands.iter().enumerate() {
                    let r = gains[i] / p.items[j].cost;
                    if r > key {
                        key = r;
                        pos = i;
                    }
                }
                pos
            }
        };
        let j = cands.remove(pos);
        let gain = gains[pos];

        // include
        let (spent, value) = (self.spent, self.value);
        self.spent += p.items[j].cost;
        self.value += gain;
        self.chosen.push(j);
        for &g in &p.items[j].groups {
            self.counts[g] += 1;
        }
        let r = self.visit(cands.clone());
        for &g in &p.items[j].groups {
            self.counts[g] -= 1;
        }
        self.chosen.pop();
        self.spent = spent;
        self.value = value;
        r?;
        if self.done {
            return Ok(());
        }

        // exclude
        if maximal {
            self.excluded.push(j);
        }
        let r = self.visit(cands);
        if maximal {
            self.excluded.pop();
        }
        r
    }

    /// Upper bound on the value still obtainable from `cands`.
    fn bound(&self, cands: &[usize], gains: &[f64], open: &[usize]) -> f64 {
        let p = self.problem;
        let residual = (p.budget * (1.0 + crate::model::BUDGET_TOLERANCE) - self.spent).max(0.0);

        // candidates with positive gain by decreasing gain/cost
        let mut order: Vec<usize> = (0..cands.len()).filter(|&i| gains[i] > 0.0).collect();
        order.sort_by(|&a, &b| {
            let ra = gains[a] / p.items[cands[a]].cost;
            let rb = gains[b] / p.items[cands[b]].cost;
            rb.total_cmp(&ra)
        });

        // fractional knapsack over marginal gains; `critical` is the ratio
        // of the item that no longer fits whole
        let mut room = residual;
        let mut lp = 0.0;
        let mut critical = 0.0;
        for &i in &order {
            let c = p.items[cands[i]].cost;
            if c <= room {
                room -= c;
                lp += gains[i];
            } else {
                lp += gains[i] * room / c;
                critical = gains[i] / c;
                break;
            }
        }
        let mut best = lp;

        // how many candidates can be funded together at most
        let mut costs: Vec<f64> = cands.iter().map(|&j| p.items[j].cost).collect();
        costs.sort_by(f64::total_cmp);
        let mut room = residual;
        let mut most = 0;
        for c in costs {
            if c <= room {
                room -= c;
                most += 1;
            } else {
                break;
            }
        }
        let mut cap = 0.0;
        for (g, &a) in open.iter().enumerate() {
            if a > 0 {
                let c = self.counts[g];
                let k = a.min(most);
                cap += p.group_size[g] * (p.prefix[c + k] - p.prefix[c]);
            }
        }
        best = best.min(cap);

        // Lagrangian bound with each item's priced cost split over its
        // groups in proportion to their share of its gain; it accounts for
        // diminishing returns inside a group. Convex in the multiplier.
        if critical > 0.0 && p.objective.marginal_weight(2) < 1.0 {
            for scale in [1.0, 0.75, 1.3, 0.55] {
                let v = self.lagrangian(cands, gains, &order, critical * scale, residual);
                best = best.min(v);
            }
        }
        best
    }

    fn lagrangian(
        &self,
        cands: &[usize],
        gains: &[f64],
        order: &[usize],
        lambda: f64,
        residual: f64,
    ) -> f64 {
        let p = self.problem;
        let mut taken = vec![0usize; p.group_size.len()];
        let mut total = lambda * residual;
        for &i in order {
            let item = &p.items[cands[i]];
            let price = lambda * item.cost / gains[i];
            for &g in &item.groups {
                let c = self.counts[g];
                let first = p.group_size[g] * p.weight[c + 1];
                if first <= 0.0 {
                    continue;
                }
                taken[g] += 1;
                let inc = p.group_size[g] * p.weight[c + taken[g]] - price * first;
                if inc > 0.0 {
                    total += inc;
                }
            }
        }
        total
    }

    fn leaf(&mut self) {
        match self.mode {
            Mode::Optimize => {
                if self.value > self.best {
                    self.best = self.value;
                }
            }
            Mode::First { target } => {
                if self.value >= target - self.problem.tolerance(target) {
                    self.samples.push(self.bundle());
                    self.done = true;
                }
            }
            Mode::Count {
                target,
                cap,
                sample_size,
            } => {
                if self.value >= target - self.problem.tolerance(target) {
                    self.found += 1;
                    if self.samples.len() < sample_size {
                        let b = self.bundle();
                        self.samples.push(b);
                    }
                    if self.found >= cap {
                        self.done = true;
                    }
                }
            }
        }
    }
}
