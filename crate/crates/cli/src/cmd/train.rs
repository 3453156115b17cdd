use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use phseg_core::{load_tile, FeatureTable, Label, PHProfile, RegressionForest, TileManifest};
use rayon::prelude::*;

use super::{create_dir, read_manifest};
use crate::config::Config;
use crate::error::usage;

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// External feature CSV `id,f0,...,label`.
    #[arg(long)]
    features: PathBuf,
    /// Directory of `<id>.csv` profiles as written by `php`.
    #[arg(long)]
    php: Option<PathBuf>,
    /// Tile manifest; profiles are computed from its tiles when --php is absent.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Labeled manifest overriding the labels of the other inputs.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Output directory for php_forest.json and feature_forest.json.
    #[arg(long, short)]
    out: PathBuf,
    /// Forest seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Trees per forest; overrides the config.
    #[arg(long)]
    n_trees: Option<usize>,
}

pub const PHP_FOREST: &str = "php_forest.json";
pub const FEATURE_FOREST: &str = "feature_forest.json";

fn label_of(id: &str, sources: &[&TileManifest], table: Option<Label>) -> Option<Label> {
    sources
        .iter()
        .find_map(|m| m.get(id).and_then(|e| e.label))
        .or(table)
}

pub fn run(args: TrainArgs, cfg: &Config) -> anyhow::Result<()> {
    if args.php.is_none() && args.manifest.is_none() {
        return Err(usage(
            "train-accurate needs --php or --manifest for the profiles",
        ));
    }
    let mut forest_cfg = cfg.forest.clone();
    if let Some(seed) = args.seed {
        forest_cfg.seed = seed;
    }
    if let Some(n) = args.n_trees {
        forest_cfg.n_trees = n;
    }
    forest_cfg.validate().map_err(|e| usage(e.to_string()))?;

    let table = FeatureTable::read_csv(&args.features)
        .with_context(|| format!("reading features {}", args.features.display()))?;
    let labels = args.labels.as_deref().map(read_manifest).transpose()?;
    let manifest = args.manifest.as_deref().map(read_manifest).transpose()?;
    let sources: Vec<&TileManifest> = labels.iter().chain(manifest.iter()).collect();

    let mut train: Vec<(usize, Label)> = Vec::new();
    for (i, id) in table.ids.iter().enumerate() {
        if let Some(l) = label_of(id, &sources, table.labels[i]) {
            train.push((i, l));
        }
    }
    if train.len() < 2 {
        anyhow::bail!(
            "need at least two labeled patches to train, found {}",
            train.len()
        );
    }

    let ex = cfg.extractor()?;
    let profiles = train
        .par_iter()
        .map(|&(i, _)| {
            let id = &table.ids[i];
            let profile = match (&args.php, &manifest) {
                (Some(dir), _) => PHProfile::read_csv(dir.join(format!("{id}.csv")))?,
                (None, Some(m)) => {
                    let entry = m.get(id).ok_or_else(|| {
                        phseg_core::Error::Data(format!("patch {id:?} is not in the manifest"))
                    })?;
                    ex.profile(&load_tile(&entry.path)?)?
                }
                (None, None) => unreachable!("checked above"),
            };
            Ok(profile.feature_vector())
        })
        .collect::<phseg_core::Result<Vec<_>>>()?;
    let externals: Vec<Vec<f64>> = train.iter().map(|&(i, _)| table.rows[i].clone()).collect();
    let y: Vec<f64> = train.iter().map(|&(_, l)| l.target()).collect();

    let php_forest = RegressionForest::train(&profiles, &y, &forest_cfg)?;
    let feature_forest = RegressionForest::train(&externals, &y, &forest_cfg)?;
    create_dir(&args.out)?;
    php_forest.save(args.out.join(PHP_FOREST))?;
    feature_forest.save(args.out.join(FEATURE_FOREST))?;
    log::info!(
        "trained on {} patches ({} tumor), {} trees each",
        y.len(),
        y.iter().filter(|&&v| v == 1.0).count(),
        forest_cfg.n_trees
    );
    Ok(())
}
