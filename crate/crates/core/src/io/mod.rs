//! Pabulib ingestion and the JSON-lines exchange format.

use std::path::{Path, PathBuf};

use thiserror::Error;

pub mod exchange;
pub mod pabulib;

pub use exchange::{
    read_dataset, read_predictions, read_predictions_from, read_records, write_dataset,
    write_records, ExchangeError, ExchangeRecord, Label, ProjectMap,
};
pub use pabulib::{parse_pabulib, parse_pabulib_with, PabulibError, PabulibFile, UnknownProjects};

/// Project counts kept by the default import filter.
pub const DEFAULT_PROJECT_RANGE: (usize, usize) = (20, 50);

/// Whether an imported instance passes the project-count filter.
pub fn within_project_range(instance: &crate::model::PBInstance, range: (usize, usize)) -> bool {
    (range.0..=range.1).contains(&instance.num_projects())
}

#[derive(Debug, Error)]
pub enum ImportError {
    #[error("{}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Parse { path: PathBuf, source: PabulibError },
}

/// Outcome of importing every `.pb` file of a directory, in path order.
#[derive(Debug, Default)]
pub struct DirImport {
    pub accepted: Vec<(PathBuf, PabulibFile)>,
    /// Parsed fine but outside the project range: path and project count.
    pub filtered: Vec<(PathBuf, usize)>,
    pub errors: Vec<ImportError>,
}

pub fn pb_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pb")))
        .collect();
    files.sort();
    Ok(files)
}

pub fn import_file(path: &Path, mode: UnknownProjects) -> Result<PabulibFile, ImportError> {
    let text = std::fs::read_to_string(path).map_err(|source| ImportError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse_pabulib_with(&text, mode).map_err(|source| ImportError::Parse {
        path: path.to_owned(),
        source,
    })
}

pub fn import_dir(
    dir: &Path,
    mode: UnknownProjects,
    range: (usize, usize),
) -> std::io::Result<DirImport> {
    let mut out = DirImport::default();
    for path in pb_files(dir)? {
        match import_file(&path, mode) {
            Ok(file) if within_project_range(&file.instance, range) => {
                out.accepted.push((path, file))
            }
            Ok(file) => {
                log::info!(
                    "{}: {} projects, outside {}..={}",
                    path.display(),
                    file.instance.num_projects(),
                    range.0,
                    range.1
                );
                out.filtered.push((path, file.instance.num_projects()));
            }
            Err(e) => out.errors.push(e),
        }
    }
    Ok(out)
}
