//! Welfare and representation ratios, per-dataset points in
//! welfare-representation space, RMSE between rules and Jaccard similarity.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{representation, social_welfare, Bundle, ModelError, PBInstance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("degenerate instance: optimal {which} is zero")]
    Degenerate { which: &'static str },
    #[error("cannot summarize an empty dataset")]
    EmptyDataset,
    #[error("point lists differ: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Achieved welfare and representation relative to their exact optima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPair {
    pub welfare_ratio: f64,
    pub representation_ratio: f64,
}

/// Mean ratios of one rule on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub dataset_id: String,
    pub mean_welfare_ratio: f64,
    pub mean_representation_ratio: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmseDistance {
    pub welfare_rmse: f64,
    pub representation_rmse: f64,
    pub total: f64,
}

/// `(SW(B) / opt_sw, REP(B) / opt_rep)`, unclamped: an infeasible bundle
/// may exceed 1 in welfare.
pub fn ratio_pair(
    instance: &PBInstance,
    bundle: &Bundle,
    opt_sw: u64,
    opt_rep: u64,
) -> Result<RatioPair, MetricsError> {
    if opt_sw == 0 {
        return Err(MetricsError::Degenerate { which: "welfare" });
    }
    if opt_rep == 0 {
        return Err(MetricsError::Degenerate {
            which: "representation",
        });
    }
    Ok(RatioPair {
        welfare_ratio: social_welfare(instance, bundle)? as f64 / opt_sw as f64,
        representation_ratio: representation(instance, bundle)? as f64 / opt_rep as f64,
    })
}

pub fn dataset_point(
    dataset_id: impl Into<String>,
    pairs: &[RatioPair],
) -> Result<EvalPoint, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptyDataset);
    }
    let n = pairs.len() as f64;
    Ok(EvalPoint {
        dataset_id: dataset_id.into(),
        mean_welfare_ratio: pairs.iter().map(|p| p.welfare_ratio).sum::<f64>() / n,
        mean_representation_ratio: pairs.iter().map(|p| p.representation_ratio).sum::<f64>() / n,
        count: pairs.len(),
    })
}

/// Component-wise RMSE over datasets; `total` is the sum of the two.
pub fn rmse_distance(pred: &[EvalPoint], truth: &[EvalPoint]) -> Result<RmseDistance, MetricsError> {
    if pred.is_empty() {
        return Err(MetricsError::EmptyDataset);
    }
    if pred.len() != truth.len() {
        return Err(MetricsError::Mismatch(format!(
            "{} predicted points vs {} ground-truth points",
            pred.len(),
            truth.len()
        )));
    }
    let mut sw = 0.0;
    let mut rep = 0.0;
    for (a, b) in pred.iter().zip(truth) {
        if a.dataset_id != b.dataset_id {
            return Err(MetricsError::Mismatch(format!(
                "dataset {:?} paired with {:?}",
                a.dataset_id, b.dataset_id
            )));
        }
        sw += (a.mean_welfare_ratio - b.mean_welfare_ratio).powi(2);
        rep += (a.mean_representation_ratio - b.mean_representation_ratio).powi(2);
    }
    let n = pred.len() as f64;
    let welfare_rmse = (sw / n).sqrt();
    let representation_rmse = (rep / n).sqrt();
    Ok(RmseDistance {
        welfare_rmse,
        representation_rmse,
        total: welfare_rmse + representation_rmse,
    })
}

/// `|a ∩ b| / |a ∪ b|`, and 1 when both are empty.
pub fn jaccard(a: &Bundle, b: &Bundle) -> f64 {
    let (x, y) = (a.projects(), b.projects());
    let (mut i, mut j, mut common) = (0, 0, 0usize);
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = x.len() + y.len() - common;
    if union == 0 {
        1.0
    } else {
        common as f64 / union as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::toy;
    use proptest::prelude::*;

    fn point(id: &str, w: f64, r: f64) -> EvalPoint {
        EvalPoint {
            dataset_id: id.into(),
            mean_welfare_ratio: w,
            mean_representation_ratio: r,
            count: 1,
        }
    }

    #[test]
    fn toy_ratios() {
        let inst = toy();
        let r = ratio_pair(&inst, &vec![1, 2].into(), 5, 3).unwrap();
        assert!((r.welfare_ratio - 0.6).abs() < 1e-12);
        assert!((r.representation_ratio - 2.0 / 3.0).abs() < 1e-12);
        let r = ratio_pair(&inst, &vec![0, 1].into(), 5, 3).unwrap();
        assert_eq!((r.welfare_ratio, r.representation_ratio), (1.0, 1.0));
        assert!(matches!(
            ratio_pair(&inst, &Bundle::empty(), 0, 3),
            Err(MetricsError::Degenerate { .. })
        ));
        // infeasible bundles are not clamped
        let r = ratio_pair(&inst, &vec![0, 1, 2].into(), 5, 3).unwrap();
        assert!((r.welfare_ratio - 1.2).abs() < 1e-12);
    }

    #[test]
    fn means() {
        let pairs = [
            RatioPair {
                welfare_ratio: 1.0,
                representation_ratio: 1.0,
            },
            RatioPair {
                welfare_ratio: 0.5,
                representation_ratio: 0.5,
            },
        ];
        let p = dataset_point("d", &pairs).unwrap();
        assert_eq!((p.mean_welfare_ratio, p.mean_representation_ratio, p.count), (0.75, 0.75, 2));
        let p = dataset_point("d", &pairs[1..]).unwrap();
        assert_eq!((p.mean_welfare_ratio, p.mean_representation_ratio), (0.5, 0.5));
        assert_eq!(dataset_point("d", &[]), Err(MetricsError::EmptyDataset));
    }

    #[test]
    fn rmse_example() {
        let pred = [point("a", 0.9, 1.0), point("b", 0.8, 0.9)];
        let truth = [point("a", 1.0, 1.0), point("b", 1.0, 0.9)];
        let d = rmse_distance(&pred, &truth).unwrap();
        // sqrt((0.01 + 0.04) / 2)
        assert!((d.welfare_rmse - 0.025f64.sqrt()).abs() < 1e-9);
        assert!(d.representation_rmse.abs() < 1e-9);
        assert!((d.total - 0.158).abs() < 1e-3);
        let same = rmse_distance(&truth, &truth).unwrap();
        assert_eq!((same.welfare_rmse, same.representation_rmse, same.total), (0.0, 0.0, 0.0));
        let other = [point("a", 1.0, 1.0), point("c", 1.0, 0.9)];
        assert!(matches!(rmse_distance(&pred, &other), Err(MetricsError::Mismatch(_))));
        assert!(matches!(rmse_distance(&pred, &truth[..1]), Err(MetricsError::Mismatch(_))));
    }

    #[test]
    fn jaccard_examples() {
        let a: Bundle = vec![1, 2].into();
        assert_eq!(jaccard(&a, &a), 1.0);
        assert_eq!(jaccard(&a, &vec![3, 4].into()), 0.0);
        assert!((jaccard(&a, &vec![2, 3].into()) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(jaccard(&Bundle::empty(), &Bundle::empty()), 1.0);
    }

    fn points() -> impl Strategy<Value = (Vec<EvalPoint>, Vec<EvalPoint>)> {
        (1usize..12).prop_flat_map(|n| {
            (
                proptest::collection::vec((0.0f64..1.5, 0.0f64..1.0), n),
                proptest::collection::vec((0.0f64..1.5, 0.0f64..1.0), n),
            )
                .prop_map(|(a, b)| {
                    let mk = |v: Vec<(f64, f64)>| {
                        v.into_iter()
                            .enumerate()
                            .map(|(i, (w, r))| point(&format!("d{i}"), w, r))
                            .collect::<Vec<_>>()
                    };
                    (mk(a), mk(b))
                })
        })
    }

    proptest! {
        #[test]
        fn rmse_symmetric_and_additive((a, b) in points()) {
            let ab = rmse_distance(&a, &b).unwrap();
            let ba = rmse_distance(&b, &a).unwrap();
            prop_assert!((ab.total - ba.total).abs() < 1e-12);
            prop_assert_eq!(ab.total, ab.welfare_rmse + ab.representation_rmse);
            prop_assert!(rmse_distance(&a, &a).unwrap().total == 0.0);
            if a != b {
                prop_assert!(ab.total > 0.0);
            }
        }

        #[test]
        fn jaccard_bounds(x in proptest::collection::btree_set(0usize..20, 0..10),
                          y in proptest::collection::btree_set(0usize..20, 0..10)) {
            let a: Bundle = x.iter().copied().collect();
            let b: Bundle = y.iter().copied().collect();
            let j = jaccard(&a, &b);
            prop_assert!((0.0..=1.0).contains(&j));
            prop_assert_eq!(j, jaccard(&b, &a));
            let inter = x.intersection(&y).count();
            let uni = x.union(&y).count();
            let expect = if uni == 0 { 1.0 } else { inter as f64 / uni as f64 };
            prop_assert!((j - expect).abs() < 1e-12);
        }
    }
}
