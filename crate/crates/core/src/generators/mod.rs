//! Seeded synthetic instance families and labeled datasets built from them.
//!
//! Every generator is a pure function of its parameters and seed. Each family
//! draws from its own ChaCha stream, so adding a family never perturbs the
//! others.

mod euclid;
mod families;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Bundle, PBInstance};
use crate::rules::{solve_exact_with, Rule, SolveError, SolverLimits};

pub use euclid::{
    gen_euc, gen_euc_sample, nearest_projects, CoordModel, CostModel, EucParams, EucSample,
    KModel, EXP_MEANS, EXP_MIN_COSTS, K_SCALES, SIGMAS,
};
pub use families::{
    build_ovm, build_toav, build_tocc, draw_ovm_params, draw_toav_params, draw_tocc_params,
    gen_ovm, gen_ovm_with, gen_toav, gen_toav_with, gen_tocc, gen_tocc_with, FamilyRegime,
    OvmParams, ToavParams, ToccParams,
};

/// Attempts per item before a generator gives up on finding a solvable
/// instance.
const MAX_ATTEMPTS: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("unknown family {0:?}")]
    UnknownFamily(String),
    #[error("unknown size regime {0:?}")]
    UnknownRegime(String),
    #[error("mixture weight must be in [0, 1], got {0}")]
    MixtureWeight(f64),
    #[error("dataset size must be at least 1")]
    EmptyDataset,
    #[error("no solvable instance for {what} after {attempts} attempts: {source}")]
    Unsolvable {
        what: String,
        attempts: u32,
        source: SolveError,
    },
}

/// Voter-count regimes of the Euclidean family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeRegime {
    Small,
    Medium,
    Large,
    Xlarge,
}

impl SizeRegime {
    pub const ALL: [SizeRegime; 4] = [
        SizeRegime::Small,
        SizeRegime::Medium,
        SizeRegime::Large,
        SizeRegime::Xlarge,
    ];

    pub fn voter_range(self) -> (usize, usize) {
        match self {
            SizeRegime::Small => (20, 100),
            SizeRegime::Medium => (100, 500),
            SizeRegime::Large => (500, 1000),
            SizeRegime::Xlarge => (1000, 10_000),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SizeRegime::Small => "small",
            SizeRegime::Medium => "medium",
            SizeRegime::Large => "large",
            SizeRegime::Xlarge => "xlarge",
        }
    }
}

impl FromStr for SizeRegime {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "small" => Ok(SizeRegime::Small),
            "medium" => Ok(SizeRegime::Medium),
            "large" => Ok(SizeRegime::Large),
            "xlarge" | "very_large" => Ok(SizeRegime::Xlarge),
            _ => Err(GenError::UnknownRegime(s.to_string())),
        }
    }
}

/// A synthetic family together with its size regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Euc(SizeRegime),
    Ovm(FamilyRegime),
    Toav(FamilyRegime),
    Tocc(FamilyRegime),
}

impl Family {
    fn stream(self) -> u64 {
        match self {
            Family::Euc(r) => r as u64,
            Family::Ovm(r) => 10 + r as u64,
            Family::Toav(r) => 20 + r as u64,
            Family::Tocc(r) => 30 + r as u64,
        }
    }

    /// Generates one instance of this family.
    pub fn instance(self, euc: &EucParams, seed: u64) -> PBInstance {
        match self {
            Family::Euc(regime) => gen_euc(euc, regime, seed),
            Family::Ovm(r) => gen_ovm_with(r, seed).1,
            Family::Toav(r) => gen_toav_with(r, seed).1,
            Family::Tocc(r) => gen_tocc_with(r, seed).1,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let key = |k: &FamilyRegime| match k {
            FamilyRegime::Train => "small",
            FamilyRegime::Test => "large",
        };
        match self {
            Family::Euc(r) => write!(f, "EUC_{}", r.name()),
            Family::Ovm(k) => write!(f, "OVM_{}", key(k)),
            Family::Toav(k) => write!(f, "TOAV_{}", key(k)),
            Family::Tocc(k) => write!(f, "TOCC_{}", key(k)),
        }
    }
}

impl FromStr for Family {
    type Err = GenError;

    /// Accepts `euc[_regime]`, `ovm[_small|_large]`, `toav[...]`, `tocc[...]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let (name, size) = match lower.split_once('_') {
            Some((a, b)) => (a, Some(b)),
            None => (lower.as_str(), None),
        };
        let key = |size: Option<&str>| match size {
            None | Some("small") | Some("train") => Ok(FamilyRegime::Train),
            Some("large") | Some("test") => Ok(FamilyRegime::Test),
            Some(other) => Err(GenError::UnknownRegime(other.to_string())),
        };
        match name {
            "euc" => Ok(Family::Euc(size.unwrap_or("small").parse()?)),
            "ovm" => Ok(Family::Ovm(key(size)?)),
            "toav" => Ok(Family::Toav(key(size)?)),
            "tocc" => Ok(Family::Tocc(key(size)?)),
            _ => Err(GenError::UnknownFamily(s.to_string())),
        }
    }
}

/// An instance paired with a ground-truth optimal bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub id: String,
    pub instance: PBInstance,
    pub label_bundle: Bundle,
    pub label_rule: Rule,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledSet {
    pub examples: Vec<LabeledExample>,
    /// Instances replaced because the exact solver hit its node limit.
    pub resampled: usize,
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// RNG for one named generator stream.
pub fn rng_for(seed: u64, label: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(label));
    rng
}

/// SplitMix64-style combination of a base seed with item coordinates.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ index.wrapping_mul(0xd1b5_4a32_d192_ed69);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn attempt_seed(seed: u64, stream: u64, index: u64, attempt: u32) -> u64 {
    derive_seed(derive_seed(seed, stream, index), 0x00a7_7e4d, attempt as u64)
}

/// The `index`-th unlabeled instance of `family`; the same instance
/// [`training_example`] labels unless it had to be redrawn.
pub fn family_instance(family: Family, index: usize, euc: &EucParams, seed: u64) -> PBInstance {
    family.instance(euc, attempt_seed(seed, family.stream(), index as u64, 0))
}

/// The `index`-th labeled example of `family`. Instances whose label cannot
/// be proven optimal within `limits` are redrawn; the second value is the
/// number of redraws.
pub fn training_example(
    family: Family,
    index: usize,
    rule: Rule,
    euc: &EucParams,
    seed: u64,
    limits: SolverLimits,
) -> Result<(LabeledExample, usize), GenError> {
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let instance = family.instance(euc, attempt_seed(seed, family.stream(), index as u64, attempt));
        match solve_exact_with(&instance, rule.objective(), limits) {
            Ok(opt) => {
                return Ok((
                    LabeledExample {
                        id: format!("{family}-{index:06}"),
                        instance,
                        label_bundle: opt.bundle,
                        label_rule: rule,
                    },
                    attempt as usize,
                ))
            }
            Err(e) => last = Some(e),
        }
    }
    Err(GenError::Unsolvable {
        what: format!("{family}-{index:06}"),
        attempts: MAX_ATTEMPTS,
        source: last.expect("at least one attempt"),
    })
}

/// Generates `count` instances per family and labels each with the exact
/// optimum of `rule`.
pub fn build_training_set(
    counts: &[(Family, usize)],
    rule: Rule,
    euc: &EucParams,
    seed: u64,
    limits: SolverLimits,
) -> Result<LabeledSet, GenError> {
    let mut out = LabeledSet::default();
    for &(family, count) in counts {
        for index in 0..count {
            let (example, redraws) = training_example(family, index, rule, euc, seed, limits)?;
            out.resampled += redraws;
            out.examples.push(example);
        }
    }
    if out.resampled > 0 {
        log::warn!("redrew {} instances after solver node limits", out.resampled);
    }
    Ok(out)
}

/// Where mixture datasets take their instances from: a fixed pool of
/// Euclidean and OVM instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSource {
    pub euc_regime: SizeRegime,
    pub euc_params: EucParams,
    /// Probability that a pool slot is Euclidean rather than OVM.
    pub euc_share: f64,
    pub pool_size: usize,
}

impl Default for MixtureSource {
    fn default() -> Self {
        Self {
            euc_regime: SizeRegime::Small,
            euc_params: EucParams::default(),
            // 30k EUC vs 10k OVM in the training mix
            euc_share: 0.75,
            pool_size: 1000,
        }
    }
}

/// Which pool slot and which label every example of a mixture dataset uses.
#[derive(Debug, Clone, PartialEq)]
pub struct MixturePlan {
    pub draws: Vec<(usize, Rule)>,
}

impl MixturePlan {
    /// Rules needed per slot, in slot order.
    pub fn slots(&self) -> BTreeMap<usize, Vec<Rule>> {
        let mut map: BTreeMap<usize, Vec<Rule>> = BTreeMap::new();
        for &(slot, rule) in &self.draws {
            let rules = map.entry(slot).or_default();
            if !rules.contains(&rule) {
                rules.push(rule);
            }
        }
        map
    }
}

/// Number of AV-labeled examples in a mixture of size `n`.
pub fn mixture_av_count(p: f64, n: usize) -> usize {
    ((p * n as f64).round() as usize).min(n)
}

pub fn mixture_plan(
    p: f64,
    n: usize,
    source: &MixtureSource,
    seed: u64,
) -> Result<MixturePlan, GenError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GenError::MixtureWeight(p));
    }
    if n == 0 || source.pool_size == 0 {
        return Err(GenError::EmptyDataset);
    }
    let mut rng = rng_for(seed, "mixture-plan");
    let av = mixture_av_count(p, n);
    let mut rules: Vec<Rule> = (0..n).map(|i| if i < av { Rule::Av } else { Rule::Cc }).collect();
    rules.shuffle(&mut rng);
    let draws = rules
        .into_iter()
        .map(|rule| (rng.random_range(0..source.pool_size), rule))
        .collect();
    Ok(MixturePlan { draws })
}

/// Proven-optimal label bundles of one pool instance, one per rule.
pub type SlotLabels = Vec<(Rule, Bundle)>;

/// Instance in pool slot `slot` and its labels for `rules`; redraws the slot
/// when a label cannot be proven optimal.
pub fn mixture_slot(
    source: &MixtureSource,
    seed: u64,
    slot: usize,
    rules: &[Rule],
    limits: SolverLimits,
) -> Result<(PBInstance, SlotLabels, usize), GenError> {
    let mut last = None;
    'attempts: for attempt in 0..MAX_ATTEMPTS {
        let s = attempt_seed(seed, 0x6d17, slot as u64, attempt);
        let mut pick = rng_for(s, "mixture-family");
        let instance = if pick.random_bool(source.euc_share) {
            gen_euc(&source.euc_params, source.euc_regime, s)
        } else {
            gen_ovm(s)
        };
        let mut labels = Vec::with_capacity(rules.len());
        for &rule in rules {
            match solve_exact_with(&instance, rule.objective(), limits) {
                Ok(opt) => labels.push((rule, opt.bundle)),
                Err(e) => {
                    last = Some(e);
                    continue 'attempts;
                }
            }
        }
        return Ok((instance, labels, attempt as usize));
    }
    Err(GenError::Unsolvable {
        what: format!("mixture slot {slot}"),
        attempts: MAX_ATTEMPTS,
        source: last.expect("at least one attempt"),
    })
}

/// Assembles examples from a plan and solved slots.
pub fn assemble_mixture(
    plan: &MixturePlan,
    solved: &BTreeMap<usize, (PBInstance, SlotLabels)>,
) -> Vec<LabeledExample> {
    plan.draws
        .iter()
        .enumerate()
        .map(|(i, &(slot, rule))| {
            let (instance, labels) = &solved[&slot];
            let bundle = labels
                .iter()
                .find(|(r, _)| *r == rule)
                .map(|(_, b)| b.clone())
                .expect("every planned label was solved");
            LabeledExample {
                id: format!("mix-{i:06}-slot{slot}"),
                instance: instance.clone(),
                label_bundle: bundle,
                label_rule: rule,
            }
        })
        .collect()
}

/// AV-CC-p mixture: `round(p n)` AV-labeled and `n - round(p n)` CC-labeled
/// examples over instances sampled with repetition from the pool.
pub fn build_mixture_set(
    p: f64,
    n: usize,
    source: &MixtureSource,
    seed: u64,
    limits: SolverLimits,
) -> Result<LabeledSet, GenError> {
    let plan = mixture_plan(p, n, source, seed)?;
    let mut solved = BTreeMap::new();
    let mut resampled = 0;
    for (slot, rules) in plan.slots() {
        let (instance, labels, redraws) = mixture_slot(source, seed, slot, &rules, limits)?;
        resampled += redraws;
        solved.insert(slot, (instance, labels));
    }
    Ok(LabeledSet {
        examples: assemble_mixture(&plan, &solved),
        resampled,
    })
}
