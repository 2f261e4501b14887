use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use pbkit::io::{import_dir, write_dataset, ExchangeRecord, ProjectMap, UnknownProjects};

#[derive(Args, Debug)]
pub struct ImportArgs {
    /// Directory of `.pb` files.
    #[arg(long, env = "PB_DATA_DIR")]
    dir: PathBuf,
    /// Output dataset (JSON lines).
    #[arg(long)]
    out: PathBuf,
    /// Project-id mapping file; defaults to `<out>.projects.jsonl`.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Files with fewer projects are skipped.
    #[arg(long, default_value_t = 20)]
    min_projects: usize,
    /// Files with more projects are skipped.
    #[arg(long, default_value_t = 50)]
    max_projects: usize,
    /// Drop votes naming unknown projects instead of rejecting the file,
    /// and exit with status 0 despite per-file errors.
    #[arg(long)]
    lenient: bool,
}

pub fn run(args: ImportArgs) -> Result<bool> {
    let mode = if args.lenient {
        UnknownProjects::Lenient
    } else {
        UnknownProjects::Strict
    };
    let imported = import_dir(&args.dir, mode, (args.min_projects, args.max_projects))
        .with_context(|| format!("reading {}", args.dir.display()))?;

    let mut records = Vec::new();
    let mut maps = Vec::new();
    for (path, file) in &imported.accepted {
        let id = path
            .file_stem()
            .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        if file.dropped_votes > 0 {
            log::warn!("{}: dropped {} votes naming unknown projects", path.display(), file.dropped_votes);
        }
        records.push(ExchangeRecord::from_instance(id.clone(), &file.instance));
        maps.push(ProjectMap {
            id,
            source: path.display().to_string(),
            project_ids: file.project_ids.clone(),
        });
    }
    write_dataset(&args.out, &records).with_context(|| format!("writing {}", args.out.display()))?;
    let map_path = args.map.clone().unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".projects.jsonl");
        p.into()
    });
    let mut out = BufWriter::new(File::create(&map_path)?);
    for m in &maps {
        serde_json::to_writer(&mut out, m)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;

    for (path, m) in &imported.filtered {
        println!("filtered {}: {m} projects", path.display());
    }
    for e in &imported.errors {
        eprintln!("error {e}");
    }
    println!(
        "imported {} files, filtered {}, failed {} -> {}",
        records.len(),
        imported.filtered.len(),
        imported.errors.len(),
        args.out.display()
    );
    Ok(imported.errors.is_empty() || args.lenient)
}
