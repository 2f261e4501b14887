use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use pbkit::generators::derive_seed;
use pbkit::io::{read_dataset, ExchangeRecord};
use pbkit::rules::{solve_exact_with, solve_random, solve_sequential, Objective, SolverLimits};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{LimitArgs, ObjectiveArgs};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exact,
    Sequential,
    Random,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Input dataset.
    #[arg(long)]
    data: PathBuf,
    /// Results file, one line per record.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    objective: ObjectiveArgs,
    #[arg(long, value_enum, default_value = "exact")]
    method: Method,
    /// Required by the random method.
    #[arg(long, required_if_eq("method", "random"))]
    seed: Option<u64>,
    #[command(flatten)]
    limits: LimitArgs,
    /// Exit with status 0 even if some records failed.
    #[arg(long)]
    lenient: bool,
}

/// One line of a results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub id: String,
    pub objective: String,
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn solve_record(
    record: &ExchangeRecord,
    index: usize,
    objective: Objective,
    method: Method,
    seed: Option<u64>,
    limits: SolverLimits,
) -> Solution {
    let method_name = format!("{method:?}").to_ascii_lowercase();
    let mut out = Solution {
        id: record.id.clone(),
        objective: objective.to_string(),
        method: method_name,
        bundle: None,
        value: None,
        error: None,
    };
    let inst = match record.to_instance() {
        Ok(i) => i,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    let bundle = match method {
        Method::Exact => match solve_exact_with(&inst, objective, limits) {
            Ok(r) => r.bundle,
            Err(e) => {
                out.error = Some(e.to_string());
                return out;
            }
        },
        Method::Sequential => solve_sequential(&inst, objective),
        Method::Random => {
            let seed = seed.expect("clap requires --seed for random");
            solve_random(&inst, derive_seed(seed, 0x5eed, index as u64))
        }
    };
    out.value = Some(objective.evaluate(&inst, &bundle).expect("solver bundles are valid"));
    out.bundle = Some(bundle.projects().to_vec());
    out
}

pub fn run(args: SolveArgs) -> Result<bool> {
    let objective = args.objective.objective()?;
    let records = read_dataset(&args.data).with_context(|| format!("reading {}", args.data.display()))?;
    let limits = args.limits.limits();
    let solutions: Vec<Solution> = records
        .par_iter()
        .enumerate()
        .map(|(i, r)| solve_record(r, i, objective, args.method, args.seed, limits))
        .collect();
    write_solutions(&args.out, &solutions)?;
    let failed = solutions.iter().filter(|s| s.error.is_some()).count();
    for s in solutions.iter().filter(|s| s.error.is_some()) {
        eprintln!("{}: {}", s.id, s.error.as_deref().unwrap_or_default());
    }
    println!(
        "{} {objective}: {} solved, {failed} failed -> {}",
        solutions.first().map_or("", |s| s.method.as_str()),
        solutions.len() - failed,
        args.out.display()
    );
    Ok(failed == 0 || args.lenient)
}

pub fn write_solutions(path: &Path, solutions: &[Solution]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for s in solutions {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_solutions(path: &Path) -> Result<Vec<Solution>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .with_context(|| format!("{} line {}", path.display(), i + 1))?,
        );
    }
    Ok(out)
}
