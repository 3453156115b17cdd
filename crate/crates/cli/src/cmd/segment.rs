use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use phseg_core::metrics::bench as bench_manifest;
use phseg_core::segmenter::{
    render_overlay, segment, write_decisions, write_overlay, AccurateModels, ProbabilityMap,
};
use phseg_core::{ExemplarSet, FeatureTable, Pipeline, RegressionForest, Segmenter};

use super::{create_dir, emit, read_manifest, write_text};
use crate::config::Config;
use crate::error::{summarize, usage};
use crate::{ModelArgs, PipelineKind};

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Manifest of tiles with their mosaic offsets.
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Output directory for decisions.csv, labels.txt, probability.csv and overlay.png.
    #[arg(long, short)]
    out: PathBuf,
    /// Overlay downsampling factor.
    #[arg(long, default_value_t = 8)]
    downsample: usize,
    /// Skip rendering the overlay image.
    #[arg(long)]
    no_overlay: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Timed runs per tile.
    #[arg(long, default_value_t = 10)]
    repetitions: usize,
    /// Untimed passes over all tiles before timing.
    #[arg(long, default_value_t = 1)]
    warmup: usize,
    /// Write the report JSON here instead of stdout.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> anyhow::Result<&'a PathBuf> {
    value
        .as_ref()
        .ok_or_else(|| usage(format!("the accurate pipeline needs {flag}")))
}

pub fn build_segmenter(args: &ModelArgs, cfg: &Config) -> anyhow::Result<Segmenter> {
    let mut extractor = cfg.extractor()?;
    let pipeline = match args.pipeline {
        PipelineKind::Fast => {
            let path = args
                .exemplars
                .as_ref()
                .ok_or_else(|| usage("the fast pipeline needs --exemplars"))?;
            let exemplars = ExemplarSet::load(path)
                .with_context(|| format!("loading exemplars {}", path.display()))?;
            if cfg.filtration.is_none() {
                extractor.filtration = exemplars.filtration().clone();
            }
            let mut config = cfg.fast;
            if let Some(c) = args.c {
                config.c = c;
            }
            if let Some(k) = args.k {
                config.k = k;
            }
            config.validate().map_err(|e| usage(e.to_string()))?;
            Pipeline::Fast { exemplars, config }
        }
        PipelineKind::Accurate => {
            let php_path = required(&args.php_forest, "--php-forest")?;
            let feat_path = required(&args.feature_forest, "--feature-forest")?;
            let table_path = required(&args.features, "--features")?;
            let php = RegressionForest::load(php_path)
                .with_context(|| format!("loading {}", php_path.display()))?;
            let feat = RegressionForest::load(feat_path)
                .with_context(|| format!("loading {}", feat_path.display()))?;
            let table = FeatureTable::read_csv(table_path)
                .with_context(|| format!("reading {}", table_path.display()))?;
            Pipeline::Accurate(AccurateModels::new(php, feat, table)?)
        }
    };
    Ok(Segmenter::new(extractor, pipeline)?)
}

pub fn run(args: SegmentArgs, cfg: &Config) -> anyhow::Result<()> {
    let manifest = read_manifest(&args.manifest)?;
    let segmenter = build_segmenter(&args.model, cfg)?;
    let outcome = segment(&manifest, &segmenter);

    create_dir(&args.out)?;
    write_decisions(args.out.join("decisions.csv"), &outcome.decisions)?;
    let map = ProbabilityMap::from_decisions(&outcome.decisions);
    write_text(&args.out.join("labels.txt"), &map.label_grid())?;
    write_text(&args.out.join("probability.csv"), &map.probability_csv())?;
    if !args.no_overlay {
        let overlay = render_overlay(&manifest, &outcome.decisions, args.downsample)?;
        write_overlay(args.out.join("overlay.png"), &overlay)?;
    }
    let tumor = outcome
        .decisions
        .iter()
        .filter(|d| d.decision.label.is_tumor())
        .count();
    log::info!(
        "{} tiles classified ({tumor} tumor) with the {} pipeline",
        outcome.decisions.len(),
        segmenter.pipeline().name()
    );
    let failures: Vec<_> = outcome
        .failures
        .into_iter()
        .map(|f| (f.tile_id, f.message))
        .collect();
    summarize(&failures, manifest.len(), "tiles")
}

pub fn bench(args: BenchArgs, cfg: &Config) -> anyhow::Result<()> {
    if args.repetitions == 0 {
        return Err(usage("--repetitions must be at least 1"));
    }
    let manifest = read_manifest(&args.manifest)?;
    if manifest.is_empty() {
        anyhow::bail!("manifest {} lists no tiles", args.manifest.display());
    }
    let segmenter = build_segmenter(&args.model, cfg)?;
    let report = bench_manifest(&manifest, &segmenter, args.repetitions, args.warmup)?;
    emit(args.out.as_ref(), &serde_json::to_string_pretty(&report)?)
}
