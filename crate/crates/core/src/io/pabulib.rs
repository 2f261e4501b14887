//! Reader for Pabulib `.pb` files (approval ballots only).
//!
//! Layout: a `META` section of `key;value` rows (must contain `budget`), a
//! `PROJECTS` section and a `VOTES` section. Each section name is followed by
//! a header row. Fields are `;`-separated and may be quoted; the `vote` field
//! lists approved project ids separated by `,`.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::model::{ModelError, PBInstance};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PabulibError {
    #[error("line {line}: {message}")]
    Syntax { line: u64, message: String },
    #[error("META section has no budget")]
    MissingBudget,
    #[error("line {line}: invalid budget {value:?}")]
    BadBudget { line: u64, value: String },
    #[error("missing {0} section")]
    MissingSection(&'static str),
    #[error("line {line}: {section} header lacks a {column:?} column")]
    MissingColumn {
        line: u64,
        section: &'static str,
        column: &'static str,
    },
    #[error("line {line}: project {id:?} has invalid cost {value:?}")]
    BadCost { line: u64, id: String, value: String },
    #[error("line {line}: duplicate project id {id:?}")]
    DuplicateProject { line: u64, id: String },
    #[error("line {line}: vote names unknown project {id:?}")]
    UnknownProject { line: u64, id: String },
    #[error("unsupported vote_type {0:?} (only approval ballots are read)")]
    UnsupportedVoteType(String),
    #[error("VOTES section is empty")]
    EmptyVotes,
    #[error("invalid instance: {0}")]
    Instance(#[from] ModelError),
}

/// What to do with a vote naming an unknown project.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownProjects {
    /// Fail the whole file.
    #[default]
    Strict,
    /// Drop the offending vote.
    Lenient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PabulibFile {
    pub instance: PBInstance,
    /// Original project id of every dense project index (file order).
    pub project_ids: Vec<String>,
    pub voter_ids: Vec<String>,
    pub meta: BTreeMap<String, String>,
    /// Votes dropped in lenient mode.
    pub dropped_votes: usize,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Meta,
    Projects,
    Votes,
}

fn parse_number(raw: &str) -> Option<f64> {
    raw.trim().replace(',', ".").parse::<f64>().ok()
}

fn column(header: &[String], name: &'static str) -> Option<usize> {
    header.iter().position(|h| h == name)
}

pub fn parse_pabulib(text: &str) -> Result<PabulibFile, PabulibError> {
    parse_pabulib_with(text, UnknownProjects::Strict)
}

pub fn parse_pabulib_with(text: &str, mode: UnknownProjects) -> Result<PabulibFile, PabulibError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b';')
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());

    let mut section = Section::None;
    let mut header: Option<Vec<String>> = None;
    let mut seen = [false; 3];

    let mut meta = BTreeMap::new();
    let mut budget: Option<f64> = None;
    let mut project_ids: Vec<String> = Vec::new();
    let mut index_of: HashMap<String, usize> = HashMap::new();
    let mut costs: Vec<f64> = Vec::new();
    let mut cost_col = 0;
    let mut id_col = 0;
    let mut vote_col = 0;
    let mut voter_col = 0;
    let mut voter_ids = Vec::new();
    let mut approvals: Vec<Vec<usize>> = Vec::new();
    let mut dropped_votes = 0;

    for record in reader.records() {
        let record = record.map_err(|e| PabulibError::Syntax {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let fields: Vec<String> = record.iter().map(|f| f.trim().to_string()).collect();
        if fields.iter().all(|f| f.is_empty()) {
            continue;
        }
        let first = fields[0].to_ascii_lowercase();
        let next = match first.as_str() {
            "meta" if fields.len() == 1 => Some((Section::Meta, 0)),
            "projects" if fields.len() == 1 => Some((Section::Projects, 1)),
            "votes" if fields.len() == 1 => Some((Section::Votes, 2)),
            _ => None,
        };
        if let Some((s, i)) = next {
            if s == Section::Votes {
                vote_type_check(&meta)?;
            }
            section = s;
            seen[i] = true;
            header = None;
            continue;
        }

        if header.is_none() {
            let head: Vec<String> = fields.iter().map(|f| f.to_ascii_lowercase()).collect();
            match section {
                Section::Projects => {
                    id_col = column(&head, "project_id").unwrap_or(0);
                    cost_col = column(&head, "cost").ok_or(PabulibError::MissingColumn {
                        line,
                        section: "PROJECTS",
                        column: "cost",
                    })?;
                }
                Section::Votes => {
                    voter_col = column(&head, "voter_id").unwrap_or(0);
                    vote_col = column(&head, "vote").ok_or(PabulibError::MissingColumn {
                        line,
                        section: "VOTES",
                        column: "vote",
                    })?;
                }
                Section::None => {
                    return Err(PabulibError::Syntax {
                        line,
                        message: "content before the META section".into(),
                    })
                }
                // META's header row is a key;value row in most files
                Section::Meta => {}
            }
            let headerless_meta = section == Section::Meta && head[0] != "key";
            header = Some(head);
            if !headerless_meta {
                continue;
            }
        }

        match section {
            Section::Meta => record_meta(&fields, line, &mut meta, &mut budget)?,
            Section::Projects => {
                let id = fields.get(id_col).cloned().unwrap_or_default();
                let raw = fields.get(cost_col).cloned().unwrap_or_default();
                let cost = parse_number(&raw)
                    .filter(|c| c.is_finite() && *c > 0.0)
                    .ok_or(PabulibError::BadCost {
                        line,
                        id: id.clone(),
                        value: raw,
                    })?;
                if index_of.contains_key(&id) {
                    return Err(PabulibError::DuplicateProject { line, id });
                }
                index_of.insert(id.clone(), project_ids.len());
                project_ids.push(id);
                costs.push(cost);
            }
            Section::Votes => {
                let raw = fields.get(vote_col).map(String::as_str).unwrap_or("");
                let mut ballot = Vec::new();
                let mut unknown = None;
                for id in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    match index_of.get(id) {
                        Some(&p) => ballot.push(p),
                        None => {
                            unknown = Some(id.to_string());
                            break;
                        }
                    }
                }
                if let Some(id) = unknown {
                    match mode {
                        UnknownProjects::Strict => {
                            return Err(PabulibError::UnknownProject { line, id })
                        }
                        UnknownProjects::Lenient => {
                            dropped_votes += 1;
                            continue;
                        }
                    }
                }
                voter_ids.push(fields.get(voter_col).cloned().unwrap_or_default());
                approvals.push(ballot);
            }
            Section::None => unreachable!("header handling rejects rows before META"),
        }
    }

    if !seen[0] {
        return Err(PabulibError::MissingSection("META"));
    }
    if !seen[1] {
        return Err(PabulibError::MissingSection("PROJECTS"));
    }
    if !seen[2] {
        return Err(PabulibError::MissingSection("VOTES"));
    }
    vote_type_check(&meta)?;
    let budget = budget.ok_or(PabulibError::MissingBudget)?;
    if approvals.is_empty() && dropped_votes == 0 {
        return Err(PabulibError::EmptyVotes);
    }
    let instance = PBInstance::new(approvals, costs, budget)?;
    Ok(PabulibFile {
        instance,
        project_ids,
        voter_ids,
        meta,
        dropped_votes,
    })
}

fn record_meta(
    fields: &[String],
    line: u64,
    meta: &mut BTreeMap<String, String>,
    budget: &mut Option<f64>,
) -> Result<(), PabulibError> {
    let key = fields[0].to_ascii_lowercase();
    let value = fields.get(1).cloned().unwrap_or_default();
    if key == "budget" {
        let b = parse_number(&value)
            .filter(|b| b.is_finite() && *b > 0.0)
            .ok_or(PabulibError::BadBudget {
                line,
                value: value.clone(),
            })?;
        *budget = Some(b);
    }
    meta.insert(key, value);
    Ok(())
}

fn vote_type_check(meta: &BTreeMap<String, String>) -> Result<(), PabulibError> {
    match meta.get("vote_type").map(|s| s.to_ascii_lowercase()) {
        None => Ok(()),
        Some(t) if t == "approval" || t == "choose-1" => Ok(()),
        Some(t) => Err(PabulibError::UnsupportedVoteType(t)),
    }
}
