use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use pbkit::io::read_dataset;
use pbkit::rules::enumerate_optima;
use rayon::prelude::*;
use serde::Serialize;

use crate::report::table;
use crate::{objective_of, write_json, LimitArgs, RuleArg};

#[derive(Args, Debug)]
pub struct TiesArgs {
    /// Input dataset.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "av,cc,pav")]
    rules: Vec<RuleArg>,
    /// Welfare weight when `weighted` is among the rules.
    #[arg(long)]
    p: Option<f64>,
    /// Counting stops at this many optimal bundles.
    #[arg(long, default_value_t = 10_000)]
    cap: u64,
    /// Per-record counts as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    limits: LimitArgs,
    /// Exit with status 0 even if some records failed.
    #[arg(long)]
    lenient: bool,
}

#[derive(Serialize)]
struct RecordTies {
    id: String,
    count: Option<u64>,
    saturated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct RuleTies {
    rule: String,
    mean: f64,
    median: u64,
    p90: u64,
    max: u64,
    saturated: usize,
    failed: usize,
    records: Vec<RecordTies>,
}

/// Nearest-rank percentile of sorted values.
fn percentile(sorted: &[u64], q: f64) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

pub fn run(args: TiesArgs) -> Result<bool> {
    let records = read_dataset(&args.data).with_context(|| format!("reading {}", args.data.display()))?;
    let limits = args.limits.limits();
    let mut summaries = Vec::new();
    for &rule in &args.rules {
        let p = if rule == RuleArg::Weighted { args.p } else { None };
        let objective = objective_of(rule, p)?;
        let per_record: Vec<RecordTies> = records
            .par_iter()
            .map(|r| {
                let res = r
                    .to_instance()
                    .map_err(|e| e.to_string())
                    .and_then(|inst| enumerate_optima(&inst, objective, args.cap, 0, limits).map_err(|e| e.to_string()));
                match res {
                    Ok(t) => RecordTies {
                        id: r.id.clone(),
                        count: Some(t.count.value()),
                        saturated: t.count.saturated(),
                        error: None,
                    },
                    Err(e) => RecordTies {
                        id: r.id.clone(),
                        count: None,
                        saturated: false,
                        error: Some(e),
                    },
                }
            })
            .collect();
        let mut counts: Vec<u64> = per_record.iter().filter_map(|r| r.count).collect();
        counts.sort_unstable();
        let mean = if counts.is_empty() {
            0.0
        } else {
            counts.iter().sum::<u64>() as f64 / counts.len() as f64
        };
        summaries.push(RuleTies {
            rule: objective.to_string(),
            mean,
            median: percentile(&counts, 0.5),
            p90: percentile(&counts, 0.9),
            max: counts.last().copied().unwrap_or(0),
            saturated: per_record.iter().filter(|r| r.saturated).count(),
            failed: per_record.iter().filter(|r| r.error.is_some()).count(),
            records: per_record,
        });
    }

    let mut header = vec!["metric".to_string()];
    header.extend(summaries.iter().map(|s| s.rule.to_ascii_uppercase()));
    let row = |name: &str, f: &dyn Fn(&RuleTies) -> String| {
        let mut r = vec![name.to_string()];
        r.extend(summaries.iter().map(f));
        r
    };
    let rows = vec![
        row("mean ties", &|s| format!("{:.2}", s.mean)),
        row("median", &|s| s.median.to_string()),
        row("90th percentile", &|s| s.p90.to_string()),
        row("max", &|s| s.max.to_string()),
        row(&format!("capped at {}", args.cap), &|s| s.saturated.to_string()),
        row("failed", &|s| s.failed.to_string()),
    ];
    println!("{} records from {}", records.len(), args.data.display());
    print!("{}", table(&header, &rows));
    for s in &summaries {
        for r in s.records.iter().filter(|r| r.error.is_some()) {
            eprintln!("{} {}: {}", s.rule, r.id, r.error.as_deref().unwrap_or_default());
        }
    }

    let failed: usize = summaries.iter().map(|s| s.failed).sum();
    if let Some(path) = &args.report {
        #[derive(Serialize)]
        struct Report<'a> {
            cap: u64,
            rules: &'a [RuleTies],
        }
        write_json(path, &Report { cap: args.cap, rules: &summaries })?;
    }
    Ok(failed == 0 || args.lenient)
}
