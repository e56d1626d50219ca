use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{apply_globals, simulate::simulate};
use crate::output::{Format, Summary};
use crate::{CliError, Globals, Scenario};

fn run_one(path: &Path, g: &Globals) -> Result<(PathBuf, Summary), CliError> {
    let mut sc = Scenario::load(path)?;
    apply_globals(&mut sc, g);
    let format = g.format.or(sc.format).unwrap_or(Format::Csv);
    let out = match (&sc.path, &g.out) {
        (Some(p), _) => p.clone(),
        (None, Some(dir)) => {
            let stem = path.file_stem().unwrap_or_default();
            dir.join(stem).with_extension(format.extension())
        }
        (None, None) => {
            return Err(CliError::parse(format!("{}: no output.path and no --out directory", path.display())))
        }
    };
    let (table, mut summary) = simulate(&sc)?;
    table.write_to_path(&out, format)?;
    summary.set("scenario", path.display().to_string()).set("output", out.display().to_string());
    Ok((out, summary))
}

/// Runs every scenario in parallel; prints one summary line per scenario in
/// input order and fails with the most severe error encountered.
pub fn batch(paths: &[PathBuf], g: &Globals) -> Result<(), CliError> {
    if let Some(dir) = &g.out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::domain(format!("{}: {e}", dir.display())))?;
    }
    let results: Vec<_> = paths.par_iter().map(|p| run_one(p, g)).collect();
    let mut worst: Option<CliError> = None;
    for (p, r) in paths.iter().zip(results) {
        match r {
            Ok((_, s)) => println!("{s}"),
            Err(e) => {
                eprintln!("error: {}: {e}", p.display());
                if worst.as_ref().is_none_or(|w| w.exit_code() < e.exit_code()) {
                    worst = Some(e);
                }
            }
        }
    }
    worst.map_or(Ok(()), Err)
}
