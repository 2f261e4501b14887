use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use pbkit::io::{read_dataset, read_predictions, ExchangeRecord};
use pbkit::metrics::{dataset_point, jaccard, ratio_pair, rmse_distance, EvalPoint, RatioPair, RmseDistance};
use pbkit::model::{feasible, greedy_fill_from_scores, Bundle, ScoreVector};
use pbkit::rules::{solve_exact_with, Objective, SolverLimits};
use rayon::prelude::*;
use serde::Serialize;

use crate::report::{fixed, table};
use crate::solve::read_solutions;
use crate::{objective_of, write_json, LimitArgs, RuleArg};

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Dataset files; each becomes one point in welfare-representation space.
    #[arg(long, required = true)]
    data: Vec<PathBuf>,
    /// Results files written by `solve`.
    #[arg(long, required_unless_present = "predictions", conflicts_with = "predictions")]
    bundles: Vec<PathBuf>,
    /// Score files; scores become bundles by greedy filling.
    #[arg(long)]
    predictions: Vec<PathBuf>,
    /// Ground-truth rule the candidate is compared with.
    #[arg(long, value_enum)]
    truth: RuleArg,
    /// Welfare weight when the truth rule is `weighted`.
    #[arg(long)]
    truth_p: Option<f64>,
    /// Column name of the candidate in the table.
    #[arg(long, default_value = "candidate")]
    name: String,
    /// Machine-readable report.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    limits: LimitArgs,
}

enum Candidate {
    Bundle(Vec<usize>),
    Scores(ScoreVector),
}

struct RecordEval {
    candidate: RatioPair,
    truth: RatioPair,
    jaccard: f64,
    feasible: bool,
}

#[derive(Serialize)]
struct DatasetReport {
    dataset_id: String,
    records: usize,
    /// Records without proven optima, left out of every mean.
    excluded: usize,
    candidate: EvalPoint,
    truth: EvalPoint,
    mean_jaccard: f64,
    feasibility_rate: f64,
}

#[derive(Serialize)]
struct Report {
    truth: String,
    candidate: String,
    datasets: Vec<DatasetReport>,
    rmse: RmseDistance,
}

fn dataset_id(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn evaluate(
    record: &ExchangeRecord,
    candidate: &Candidate,
    truth: Objective,
    limits: SolverLimits,
) -> Result<Option<RecordEval>> {
    let inst = record.to_instance()?;
    let bundle: Bundle = match candidate {
        Candidate::Bundle(b) => {
            let b: Bundle = b.iter().copied().collect();
            b.validate(&inst).with_context(|| format!("record {}", record.id))?;
            b
        }
        Candidate::Scores(s) => greedy_fill_from_scores(&inst, s)?,
    };
    let solve = |o: Objective| solve_exact_with(&inst, o, limits);
    let (Ok(av), Ok(cc), Ok(gt)) = (solve(Objective::Av), solve(Objective::Cc), solve(truth)) else {
        log::warn!("{}: optimum not proven, excluded", record.id);
        return Ok(None);
    };
    let (sw, rep) = (av.value as u64, cc.value as u64);
    if sw == 0 || rep == 0 {
        log::warn!("{}: degenerate instance, excluded", record.id);
        return Ok(None);
    }
    Ok(Some(RecordEval {
        candidate: ratio_pair(&inst, &bundle, sw, rep)?,
        truth: ratio_pair(&inst, &gt.bundle, sw, rep)?,
        jaccard: jaccard(&bundle, &gt.bundle),
        feasible: feasible(&inst, &bundle)?,
    }))
}

pub fn run(args: EvalArgs) -> Result<bool> {
    let truth = objective_of(args.truth, args.truth_p)?;
    let limits = args.limits.limits();
    let mut datasets = Vec::new();
    let mut seen = HashSet::new();
    for path in &args.data {
        let records = read_dataset(path).with_context(|| format!("reading {}", path.display()))?;
        for r in &records {
            if !seen.insert(r.id.clone()) {
                bail!("record id {:?} appears twice across datasets", r.id);
            }
        }
        datasets.push((dataset_id(path), records));
    }
    let all: Vec<ExchangeRecord> = datasets.iter().flat_map(|(_, r)| r.iter().cloned()).collect();

    let mut candidates: HashMap<String, Candidate> = HashMap::new();
    for path in &args.bundles {
        for s in read_solutions(path)? {
            let Some(bundle) = s.bundle else {
                bail!("{}: record {} has no bundle ({})", path.display(), s.id, s.error.unwrap_or_default());
            };
            candidates.insert(s.id, Candidate::Bundle(bundle));
        }
    }
    for path in &args.predictions {
        for (id, scores) in read_predictions(path, &all).with_context(|| format!("reading {}", path.display()))? {
            candidates.insert(id, Candidate::Scores(scores));
        }
    }
    if let Some(id) = candidates.keys().find(|id| !seen.contains(*id)) {
        bail!("candidate id {id:?} matches no dataset record");
    }

    let mut reports = Vec::new();
    for (name, records) in &datasets {
        let evals = records
            .par_iter()
            .map(|r| {
                let c = candidates.get(&r.id).with_context(|| format!("no candidate for record {:?}", r.id))?;
                evaluate(r, c, truth, limits)
            })
            .collect::<Result<Vec<_>>>()?;
        let kept: Vec<RecordEval> = evals.into_iter().flatten().collect();
        let excluded = records.len() - kept.len();
        if kept.is_empty() {
            bail!("dataset {name}: no record has proven optima");
        }
        let n = kept.len() as f64;
        let cand: Vec<RatioPair> = kept.iter().map(|e| e.candidate).collect();
        let gt: Vec<RatioPair> = kept.iter().map(|e| e.truth).collect();
        reports.push(DatasetReport {
            dataset_id: name.clone(),
            records: records.len(),
            excluded,
            candidate: dataset_point(name.clone(), &cand)?,
            truth: dataset_point(name.clone(), &gt)?,
            mean_jaccard: kept.iter().map(|e| e.jaccard).sum::<f64>() / n,
            feasibility_rate: kept.iter().filter(|e| e.feasible).count() as f64 / n,
        });
    }
    let cand_points: Vec<EvalPoint> = reports.iter().map(|r| r.candidate.clone()).collect();
    let truth_points: Vec<EvalPoint> = reports.iter().map(|r| r.truth.clone()).collect();
    let rmse = rmse_distance(&cand_points, &truth_points)?;

    let truth_col = format!("{} (truth)", truth.to_string().to_ascii_uppercase());
    let header = vec!["metric".to_string(), truth_col, args.name.clone()];
    let mut rows = Vec::new();
    for r in &reports {
        rows.push(vec![
            format!("{} welfare ratio", r.dataset_id),
            fixed(r.truth.mean_welfare_ratio),
            fixed(r.candidate.mean_welfare_ratio),
        ]);
        rows.push(vec![
            format!("{} representation ratio", r.dataset_id),
            fixed(r.truth.mean_representation_ratio),
            fixed(r.candidate.mean_representation_ratio),
        ]);
        rows.push(vec![format!("{} Jaccard", r.dataset_id), fixed(1.0), fixed(r.mean_jaccard)]);
        rows.push(vec![format!("{} feasible", r.dataset_id), fixed(1.0), fixed(r.feasibility_rate)]);
        if r.excluded > 0 {
            rows.push(vec![format!("{} excluded", r.dataset_id), r.excluded.to_string(), String::new()]);
        }
    }
    rows.push(vec!["welfare ratio RMSE".into(), fixed(0.0), fixed(rmse.welfare_rmse)]);
    rows.push(vec!["representation ratio RMSE".into(), fixed(0.0), fixed(rmse.representation_rmse)]);
    rows.push(vec!["total RMSE".into(), fixed(0.0), fixed(rmse.total)]);
    print!("{}", table(&header, &rows));

    if let Some(path) = &args.report {
        let report = Report {
            truth: truth.to_string(),
            candidate: args.name.clone(),
            datasets: reports,
            rmse,
        };
        write_json(path, &report)?;
    }
    Ok(true)
}
