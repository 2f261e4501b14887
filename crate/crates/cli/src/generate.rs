use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use pbkit::generators::{
    assemble_mixture, family_instance, mixture_plan, mixture_slot, training_example, EucParams,
    Family, MixtureSource, SizeRegime,
};
use pbkit::io::{write_dataset, ExchangeRecord};
use pbkit::rules::Rule;
use rayon::prelude::*;

use crate::LimitArgs;

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// euc, ovm, toav or tocc.
    #[arg(long, required_unless_present = "mixture")]
    family: Option<String>,
    /// small, medium, large or xlarge for euc; small (train) or large (test)
    /// for the other families.
    #[arg(long, default_value = "small")]
    regime: String,
    /// Number of records.
    #[arg(long)]
    count: usize,
    /// Master seed; the output is a pure function of the arguments.
    #[arg(long)]
    seed: u64,
    /// Output dataset (JSON lines).
    #[arg(long)]
    out: PathBuf,
    /// Label every record with this rule's exact optimum.
    #[arg(long, value_parser = parse_rule)]
    label: Option<Rule>,
    /// Build an AV/CC label mixture instead of a single family.
    #[arg(long, conflicts_with_all = ["family", "label"], requires = "p")]
    mixture: bool,
    /// Share of AV labels in a mixture.
    #[arg(long)]
    p: Option<f64>,
    /// Distinct instances a mixture samples from.
    #[arg(long, default_value_t = 1000)]
    pool_size: usize,
    /// Euclidean share of the mixture pool (the rest is OVM).
    #[arg(long, default_value_t = 0.75)]
    euc_share: f64,
    #[command(flatten)]
    limits: LimitArgs,
}

fn parse_rule(s: &str) -> Result<Rule, String> {
    s.parse().map_err(|e: pbkit::rules::RuleError| e.to_string())
}

pub fn run(args: GenerateArgs) -> Result<bool> {
    if args.count == 0 {
        bail!("--count must be positive");
    }
    let records = if args.mixture {
        mixture(&args)?
    } else {
        single_family(&args)?
    };
    write_dataset(&args.out, &records).with_context(|| format!("writing {}", args.out.display()))?;
    println!("wrote {} records to {}", records.len(), args.out.display());
    Ok(true)
}

fn single_family(args: &GenerateArgs) -> Result<Vec<ExchangeRecord>> {
    let name = args.family.as_deref().expect("clap enforces --family");
    let family: Family = format!("{name}_{}", args.regime).parse()?;
    let euc = EucParams::default();
    let limits = args.limits.limits();
    let records: Vec<ExchangeRecord> = match args.label {
        None => (0..args.count)
            .into_par_iter()
            .map(|i| {
                let inst = family_instance(family, i, &euc, args.seed);
                ExchangeRecord::from_instance(format!("{family}-{i:06}"), &inst)
            })
            .collect(),
        Some(rule) => {
            let examples = (0..args.count)
                .into_par_iter()
                .map(|i| training_example(family, i, rule, &euc, args.seed, limits))
                .collect::<Result<Vec<_>, _>>()?;
            let redraws: usize = examples.iter().map(|e| e.1).sum();
            if redraws > 0 {
                log::warn!("{redraws} instances redrawn after hitting the node limit");
            }
            examples.iter().map(|(e, _)| ExchangeRecord::from_example(e)).collect()
        }
    };
    let label = args.label.map_or("unlabeled".to_string(), |r| format!("{r} labels"));
    println!("{family}: {} records ({label}), seed {}", records.len(), args.seed);
    Ok(records)
}

fn mixture(args: &GenerateArgs) -> Result<Vec<ExchangeRecord>> {
    let p = args.p.expect("clap enforces --p");
    let source = MixtureSource {
        euc_regime: args.regime.parse::<SizeRegime>()?,
        euc_params: EucParams::default(),
        euc_share: args.euc_share,
        pool_size: args.pool_size,
    };
    let limits = args.limits.limits();
    let plan = mixture_plan(p, args.count, &source, args.seed)?;
    let slots: Vec<(usize, Vec<Rule>)> = plan.slots().into_iter().collect();
    let solved = slots
        .into_par_iter()
        .map(|(slot, rules)| {
            mixture_slot(&source, args.seed, slot, &rules, limits)
                .map(|(inst, labels, _)| (slot, (inst, labels)))
        })
        .collect::<Result<BTreeMap<_, _>, _>>()?;
    let examples = assemble_mixture(&plan, &solved);
    let av = examples.iter().filter(|e| e.label_rule == Rule::Av).count();
    println!(
        "mixture p={p}: {av} AV + {} CC labels over {} distinct instances, seed {}",
        examples.len() - av,
        solved.len(),
        args.seed
    );
    Ok(examples.iter().map(ExchangeRecord::from_example).collect())
}
