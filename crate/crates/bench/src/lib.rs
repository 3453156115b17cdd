//! In-memory fixtures shared by the benchmarks.

use phseg_core::exemplars::Exemplar;
use phseg_core::synth::{generate_tile, intensity_histogram};
use phseg_core::{
    hematoxylin_channel, ExemplarSet, FastConfig, ForestConfig, Label, Pipeline, ProfileExtractor,
    Result, RgbPatch, Segmenter, SelectionMethod,
};

/// Synthetic tiles, alternating tumor and normal.
pub fn tiles(n: usize, seed: u64) -> Vec<(String, RgbPatch)> {
    let stain = ProfileExtractor::default().stain;
    (0..n)
        .map(|i| {
            let label = if i % 2 == 0 {
                Label::Tumor
            } else {
                Label::Normal
            };
            let idx = (i / 2) as u64;
            (
                format!("{label}_{idx:04}"),
                generate_tile(label, seed, idx, &stain),
            )
        })
        .collect()
}

/// Fast-pipeline segmenter over `per_class` synthetic exemplars per class.
pub fn fast_segmenter(per_class: usize, seed: u64) -> Result<Segmenter> {
    let ex = ProfileExtractor::default();
    let mut tumor = Vec::new();
    let mut normal = Vec::new();
    for (id, patch) in tiles(2 * per_class, seed) {
        let profile = ex.profile_rgb(&patch)?;
        let bucket = if id.starts_with("tumor") {
            &mut tumor
        } else {
            &mut normal
        };
        bucket.push(Exemplar { id, profile });
    }
    let set = ExemplarSet::new(
        SelectionMethod::Manual,
        None,
        ex.filtration.clone(),
        tumor,
        normal,
    )?;
    Segmenter::new(
        ex,
        Pipeline::Fast {
            exemplars: set,
            config: FastConfig::default(),
        },
    )
}

/// 16-bin hematoxylin intensity histograms of `n` synthetic tiles with
/// their tumor targets.
pub fn histogram_rows(n: usize, seed: u64) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let ex = ProfileExtractor::default();
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for (id, patch) in tiles(n, seed) {
        x.push(intensity_histogram(
            &hematoxylin_channel(&patch, &ex.stain, ex.c_max)?,
            16,
        ));
        y.push(if id.starts_with("tumor") { 1.0 } else { 0.0 });
    }
    Ok((x, y))
}

pub fn forest_config(n_trees: usize, seed: u64) -> ForestConfig {
    ForestConfig {
        n_trees,
        seed,
        ..ForestConfig::default()
    }
}
