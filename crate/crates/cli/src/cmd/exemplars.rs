use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, ValueEnum};
use phseg_core::exemplars::{
    build_exemplar_set, flatten_activation, iqr_bin_select, kmeans_exemplars, patch_score,
    random_exemplars, ActivationTensor, ScoreRow, ScoreTable,
};
use phseg_core::{load_tile, Label, SelectionMethod, TileManifest};
use rayon::prelude::*;

use super::{create_dir, read_manifest};
use crate::config::Config;
use crate::error::usage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// Interquartile-range binning of per-patch scores.
    Scores,
    /// Patches nearest the k-means centroids of mean RGB.
    Kmeans,
    /// Uniform random sample.
    Random,
}

#[derive(Debug, Args)]
pub struct ExemplarArgs {
    #[arg(value_enum)]
    method: Method,
    /// Labeled manifest of candidate patches.
    #[arg(long)]
    manifest: PathBuf,
    /// Exemplars per class.
    #[arg(short, long, default_value_t = 128)]
    q: usize,
    /// Output directory for exemplars.json and profiles/.
    #[arg(long, short)]
    out: PathBuf,
    /// Score CSV `patch_id,label,score` (scores method).
    #[arg(long, group = "source")]
    scores: Option<PathBuf>,
    /// Directory of `<tile_id>.actv` activation tensors (scores method).
    #[arg(long, group = "source")]
    activations: Option<PathBuf>,
    /// Score each patch by its mean hematoxylin intensity (scores method).
    #[arg(long, group = "source")]
    intensity: bool,
    /// Selection seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn labeled_ids(manifest: &TileManifest, label: Label) -> Vec<String> {
    manifest.with_label(label).map(|e| e.id.clone()).collect()
}

fn require_labels(manifest: &TileManifest) -> anyhow::Result<()> {
    match manifest.iter().find(|e| e.label.is_none()) {
        Some(e) => anyhow::bail!("manifest tile {:?} has no label", e.id),
        None => Ok(()),
    }
}

fn score_table(
    args: &ExemplarArgs,
    manifest: &TileManifest,
    cfg: &Config,
) -> anyhow::Result<ScoreTable> {
    if let Some(path) = &args.scores {
        return ScoreTable::read_csv(path)
            .with_context(|| format!("reading scores {}", path.display()));
    }
    let ex = cfg.extractor()?;
    let rows = manifest
        .entries()
        .par_iter()
        .map(|e| {
            let score = if let Some(dir) = &args.activations {
                let path = dir.join(format!("{}.actv", e.id));
                let t = ActivationTensor::load(&path)?;
                patch_score(&flatten_activation(&t).values)?
            } else {
                ex.substrate(&load_tile(&e.path)?)?.mean()
            };
            Ok(ScoreRow {
                patch_id: e.id.clone(),
                label: e.label.expect("labels checked"),
                score,
            })
        })
        .collect::<phseg_core::Result<Vec<_>>>()?;
    Ok(ScoreTable::new(rows)?)
}

pub fn run(args: ExemplarArgs, cfg: &Config) -> anyhow::Result<()> {
    if args.q == 0 {
        return Err(usage("-q must be at least 1"));
    }
    let has_source = args.scores.is_some() || args.activations.is_some() || args.intensity;
    match (args.method, has_source) {
        (Method::Scores, false) => {
            return Err(usage(
                "scores method needs --scores, --activations or --intensity",
            ))
        }
        (Method::Kmeans | Method::Random, true) => {
            return Err(usage(
                "--scores, --activations and --intensity apply only to the scores method",
            ))
        }
        _ => {}
    }
    let manifest = read_manifest(&args.manifest)?;
    require_labels(&manifest)?;
    let seed = args.seed.unwrap_or(cfg.seed);

    let (tumor, normal, method, seed) = match args.method {
        Method::Scores => {
            let table = score_table(&args, &manifest, cfg)?;
            if args.scores.is_none() {
                create_dir(&args.out)?;
                table.write_csv(args.out.join("scores.csv"))?;
            }
            (
                iqr_bin_select(&table, Label::Tumor, args.q)?,
                iqr_bin_select(&table, Label::Normal, args.q)?,
                SelectionMethod::Scores,
                None,
            )
        }
        Method::Kmeans => {
            let pick = |label| -> anyhow::Result<Vec<String>> {
                let patches = manifest
                    .with_label(label)
                    .collect::<Vec<_>>()
                    .par_iter()
                    .map(|e| Ok((e.id.clone(), load_tile(&e.path)?.to_rgb())))
                    .collect::<phseg_core::Result<Vec<_>>>()?;
                Ok(kmeans_exemplars(&patches, args.q, seed)?)
            };
            (
                pick(Label::Tumor)?,
                pick(Label::Normal)?,
                SelectionMethod::Kmeans,
                Some(seed),
            )
        }
        Method::Random => (
            random_exemplars(&labeled_ids(&manifest, Label::Tumor), args.q, seed)?,
            random_exemplars(
                &labeled_ids(&manifest, Label::Normal),
                args.q,
                seed.wrapping_add(1),
            )?,
            SelectionMethod::Random,
            Some(seed),
        ),
    };

    let set = build_exemplar_set(&manifest, &tumor, &normal, &cfg.extractor()?, method, seed)?;
    let path = set.save(&args.out)?;
    log::info!("wrote {} exemplars to {}", set.len(), path.display());
    Ok(())
}
