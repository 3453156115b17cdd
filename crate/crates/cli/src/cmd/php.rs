use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use phseg_core::load_tile;
use rayon::prelude::*;

use super::{create_dir, read_manifest};
use crate::config::Config;
use crate::error::{summarize, usage};

#[derive(Debug, Args)]
pub struct PhpArgs {
    /// Tile images or directories of tiles (png, ppm, pgm, pnm).
    inputs: Vec<PathBuf>,
    /// Take tiles from a manifest instead; CSVs are named after tile ids.
    #[arg(long, conflicts_with = "inputs")]
    manifest: Option<PathBuf>,
    /// Output directory for `<name>.csv` profiles.
    #[arg(long, short)]
    out: PathBuf,
}

const EXTENSIONS: [&str; 4] = ["png", "ppm", "pgm", "pnm"];

fn is_tile(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Expands directories to their tile files, sorted by name.
fn expand(inputs: &[PathBuf]) -> anyhow::Result<Vec<(String, PathBuf)>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(input)
                .with_context(|| format!("listing {}", input.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<_, _>>()?;
            found.retain(|p| p.is_file() && is_tile(p));
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    let mut seen = HashMap::new();
    let mut named = Vec::with_capacity(files.len());
    for f in files {
        let stem = f
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| usage(format!("cannot name output for {}", f.display())))?
            .to_string();
        if let Some(prev) = seen.insert(stem.clone(), f.clone()) {
            return Err(usage(format!(
                "{} and {} would both write {stem}.csv",
                prev.display(),
                f.display()
            )));
        }
        named.push((stem, f));
    }
    Ok(named)
}

pub fn run(args: PhpArgs, cfg: &Config) -> anyhow::Result<()> {
    let jobs = match &args.manifest {
        Some(m) => read_manifest(m)?
            .iter()
            .map(|e| (e.id.clone(), e.path.clone()))
            .collect(),
        None if args.inputs.is_empty() => return Err(usage("no input tiles given")),
        None => expand(&args.inputs)?,
    };
    let ex = cfg.extractor()?;
    create_dir(&args.out)?;
    let failures: Vec<(String, String)> = jobs
        .par_iter()
        .filter_map(|(name, path)| {
            let result = load_tile(path)
                .and_then(|tile| ex.profile(&tile))
                .and_then(|p| p.write_csv(args.out.join(format!("{name}.csv"))));
            result.err().map(|e| (name.clone(), e.to_string()))
        })
        .collect();
    log::info!("wrote {} profiles", jobs.len() - failures.len());
    summarize(&failures, jobs.len(), "tiles")
}
