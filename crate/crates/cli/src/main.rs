mod eval;
mod generate;
mod import;
mod report;
mod solve;
mod ties;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pbkit::rules::{Objective, SolverLimits};

#[derive(Parser)]
#[command(name = "pbkit", version, about = "Participatory budgeting experiments")]
struct Cli {
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset in the exchange format.
    Generate(generate::GenerateArgs),
    /// Run a rule on every record of a dataset.
    Solve(solve::SolveArgs),
    /// Compare bundles or predicted scores against a ground-truth rule.
    Eval(eval::EvalArgs),
    /// Count optimal bundles per record.
    Ties(ties::TiesArgs),
    /// Convert a directory of Pabulib files to the exchange format.
    ImportPabulib(import::ImportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Av,
    Cc,
    Pav,
    Weighted,
}

/// Objective selection shared by several commands.
#[derive(Args, Clone, Debug)]
pub struct ObjectiveArgs {
    #[arg(long, value_enum)]
    pub rule: RuleArg,
    /// Welfare weight of the weighted objective.
    #[arg(long)]
    pub p: Option<f64>,
}

impl ObjectiveArgs {
    pub fn objective(&self) -> Result<Objective> {
        objective_of(self.rule, self.p)
    }
}

pub fn objective_of(rule: RuleArg, p: Option<f64>) -> Result<Objective> {
    Ok(match (rule, p) {
        (RuleArg::Weighted, Some(p)) => Objective::weighted(p)?,
        (RuleArg::Weighted, None) => bail!("--rule weighted needs --p"),
        (_, Some(_)) => bail!("--p only applies to --rule weighted"),
        (RuleArg::Av, None) => Objective::Av,
        (RuleArg::Cc, None) => Objective::Cc,
        (RuleArg::Pav, None) => Objective::Pav,
    })
}

#[derive(Args, Clone, Copy, Debug)]
pub struct LimitArgs {
    /// Search nodes per exact solve before giving up on an instance.
    #[arg(long, default_value_t = SolverLimits::default().max_nodes)]
    pub max_nodes: u64,
}

impl LimitArgs {
    pub fn limits(&self) -> SolverLimits {
        SolverLimits {
            max_nodes: self.max_nodes,
        }
    }
}

pub fn write_json(path: &PathBuf, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Generate(args) => generate::run(args),
        Command::Solve(args) => solve::run(args),
        Command::Eval(args) => eval::run(args),
        Command::Ties(args) => ties::run(args),
        Command::ImportPabulib(args) => import::run(args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
