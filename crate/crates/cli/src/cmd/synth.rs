use std::path::PathBuf;

use clap::Args;
use phseg_core::synth::{intensity_histogram, write_corpus};
use phseg_core::{load_tile, tile_image, FeatureTable};
use rayon::prelude::*;

use crate::config::Config;
use crate::error::usage;

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Tiles per class.
    #[arg(short, long, default_value_t = 50)]
    n: usize,
    /// Generator seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for tiles/ and manifest.csv.
    #[arg(long, short)]
    out: PathBuf,
    /// Also write features.csv: a hematoxylin intensity histogram per tile
    /// with this many bins.
    #[arg(long, value_name = "BINS")]
    features: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TileArgs {
    /// Image to cut.
    image: PathBuf,
    #[arg(long, default_value_t = 256)]
    size: usize,
    /// Step between tile origins; defaults to the tile size.
    #[arg(long)]
    stride: Option<usize>,
    /// Output directory for tiles and manifest.csv.
    #[arg(long, short)]
    out: PathBuf,
    /// Tile id prefix; defaults to the image file stem.
    #[arg(long)]
    prefix: Option<String>,
}

pub fn run(args: SynthArgs, cfg: &Config) -> anyhow::Result<()> {
    if args.n == 0 {
        return Err(usage("-n must be at least 1"));
    }
    if args.features == Some(0) {
        return Err(usage("--features needs at least one bin"));
    }
    let seed = args.seed.unwrap_or(cfg.seed);
    let manifest = write_corpus(&args.out, args.n, seed)?;
    if let Some(bins) = args.features {
        let ex = cfg.extractor()?;
        let rows = manifest
            .entries()
            .par_iter()
            .map(|e| {
                Ok(intensity_histogram(
                    &ex.substrate(&load_tile(&e.path)?)?,
                    bins,
                ))
            })
            .collect::<phseg_core::Result<Vec<_>>>()?;
        let mut table = FeatureTable::default();
        for (e, row) in manifest.iter().zip(rows) {
            table.push(e.id.clone(), row, e.label)?;
        }
        table.write_csv(args.out.join("features.csv"))?;
    }
    log::info!("wrote {} tiles to {}", manifest.len(), args.out.display());
    Ok(())
}

pub fn tile(args: TileArgs) -> anyhow::Result<()> {
    let image = load_tile(&args.image)?.to_rgb();
    let prefix = match &args.prefix {
        Some(p) => p.clone(),
        None => args
            .image
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("tile")
            .to_string(),
    };
    let manifest = tile_image(
        &image,
        args.size,
        args.stride.unwrap_or(args.size),
        &args.out,
        &prefix,
    )?;
    manifest.write_csv(args.out.join("manifest.csv"))?;
    log::info!("cut {} tiles", manifest.len());
    Ok(())
}
