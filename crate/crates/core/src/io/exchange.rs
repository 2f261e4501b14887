//! Line-delimited JSON records shared with the training side.
//!
//! Every record carries a normalized instance (costs divided by the budget,
//! budget 1) plus an optional label bundle or predicted per-project scores.
//! Reals are written in their shortest round-trip form, so reading a file
//! and writing it again reproduces it byte for byte.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generators::LabeledExample;
use crate::model::{Bundle, ModelError, PBInstance, ScoreVector};
use crate::rules::Rule;

#[derive(Debug, Error)]
pub enum ExchangeError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("record {index}: {message}")]
    Schema { index: usize, message: String },
    #[error("record {index}: unknown id {id:?}")]
    UnknownId { index: usize, id: String },
    #[error("record {index}: duplicate id {id:?}")]
    DuplicateId { index: usize, id: String },
    #[error("record {index} ({id}): {got} scores for {expected} projects")]
    ScoreLength {
        index: usize,
        id: String,
        got: usize,
        expected: usize,
    },
    #[error("record {index} ({id}): score {value} of project {project} outside [0, 1]")]
    ScoreRange {
        index: usize,
        id: String,
        project: usize,
        value: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Label {
    pub rule: Rule,
    pub bundle: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExchangeRecord {
    pub id: String,
    pub approvals: Vec<Vec<usize>>,
    pub costs: Vec<f64>,
    pub budget: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<f64>>,
}

impl ExchangeRecord {
    /// Unlabeled record of the normalized instance.
    pub fn from_instance(id: impl Into<String>, instance: &PBInstance) -> Self {
        let norm = instance.normalized();
        Self {
            id: id.into(),
            approvals: norm.approvals().to_vec(),
            costs: norm.costs().to_vec(),
            budget: norm.budget(),
            label: None,
            scores: None,
        }
    }

    pub fn labeled(id: impl Into<String>, instance: &PBInstance, rule: Rule, bundle: &Bundle) -> Self {
        Self {
            label: Some(Label {
                rule,
                bundle: bundle.projects().to_vec(),
            }),
            ..Self::from_instance(id, instance)
        }
    }

    pub fn from_example(example: &LabeledExample) -> Self {
        Self::labeled(
            example.id.clone(),
            &example.instance,
            example.label_rule,
            &example.label_bundle,
        )
    }

    pub fn num_projects(&self) -> usize {
        self.costs.len()
    }

    pub fn to_instance(&self) -> Result<PBInstance, ModelError> {
        PBInstance::new(self.approvals.clone(), self.costs.clone(), self.budget)
    }

    pub fn label_bundle(&self) -> Option<Bundle> {
        self.label.as_ref().map(|l| l.bundle.iter().copied().collect())
    }

    /// Checks everything serde cannot: a valid instance, labels and scores
    /// indexing real projects.
    pub fn validate(&self) -> Result<(), String> {
        let inst = self.to_instance().map_err(|e| e.to_string())?;
        if let Some(label) = &self.label {
            let bundle: Bundle = label.bundle.iter().copied().collect();
            bundle.validate(&inst).map_err(|e| format!("label: {e}"))?;
            if bundle.len() != label.bundle.len() {
                return Err("label: repeated project index".into());
            }
        }
        if let Some(scores) = &self.scores {
            if scores.len() != inst.num_projects() {
                return Err(format!(
                    "{} scores for {} projects",
                    scores.len(),
                    inst.num_projects()
                ));
            }
            ScoreVector::new(scores.clone()).map_err(|e| format!("scores: {e}"))?;
        }
        Ok(())
    }
}

pub fn write_records<W: Write>(out: W, records: &[ExchangeRecord]) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_dataset(path: impl AsRef<Path>, records: &[ExchangeRecord]) -> std::io::Result<()> {
    write_records(File::create(path)?, records)
}

/// Parses and validates records; blank lines are skipped, indices count
/// records from 0.
pub fn read_records<R: BufRead>(input: R) -> Result<Vec<ExchangeRecord>, ExchangeError> {
    let mut records: Vec<ExchangeRecord> = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let index = records.len();
        let record: ExchangeRecord = serde_json::from_str(&line).map_err(|e| ExchangeError::Schema {
            index,
            message: e.to_string(),
        })?;
        record
            .validate()
            .map_err(|message| ExchangeError::Schema { index, message })?;
        records.push(record);
    }
    Ok(records)
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<ExchangeRecord>, ExchangeError> {
    read_records(BufReader::new(File::open(path)?))
}

/// A prediction line: only `id` and `scores` are read, other exchange
/// fields may be present and are ignored.
#[derive(Debug, Deserialize)]
struct PredictionLine {
    id: String,
    scores: Vec<f64>,
}

/// Reads `(id, scores)` records and checks them against `dataset`.
pub fn read_predictions_from<R: BufRead>(
    input: R,
    dataset: &[ExchangeRecord],
) -> Result<Vec<(String, ScoreVector)>, ExchangeError> {
    let sizes: HashMap<&str, usize> = dataset
        .iter()
        .map(|r| (r.id.as_str(), r.num_projects()))
        .collect();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let index = out.len();
        let pred: PredictionLine = serde_json::from_str(&line).map_err(|e| ExchangeError::Schema {
            index,
            message: e.to_string(),
        })?;
        let Some(&expected) = sizes.get(pred.id.as_str()) else {
            return Err(ExchangeError::UnknownId { index, id: pred.id });
        };
        if !seen.insert(pred.id.clone()) {
            return Err(ExchangeError::DuplicateId { index, id: pred.id });
        }
        if pred.scores.len() != expected {
            return Err(ExchangeError::ScoreLength {
                index,
                id: pred.id,
                got: pred.scores.len(),
                expected,
            });
        }
        if let Some((project, &value)) = pred
            .scores
            .iter()
            .enumerate()
            .find(|(_, s)| !(0.0..=1.0).contains(*s))
        {
            return Err(ExchangeError::ScoreRange {
                index,
                id: pred.id,
                project,
                value,
            });
        }
        let scores = ScoreVector::new(pred.scores).map_err(|e| ExchangeError::Schema {
            index,
            message: e.to_string(),
        })?;
        out.push((pred.id, scores));
    }
    Ok(out)
}

pub fn read_predictions(
    path: impl AsRef<Path>,
    dataset: &[ExchangeRecord],
) -> Result<Vec<(String, ScoreVector)>, ExchangeError> {
    read_predictions_from(BufReader::new(File::open(path)?), dataset)
}

/// Original Pabulib project ids for one imported record, written next to
/// the dataset so reports can name projects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectMap {
    pub id: String,
    pub source: String,
    pub project_ids: Vec<String>,
}
