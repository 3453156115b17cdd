//! Synthetic H&E-like tiles for desk-scale experiments.
//!
//! Tumor-like tiles hold dense, overlapping, irregular nuclei with mottled
//! chromatin and pale vacuoles; normal-like tiles hold sparse, round,
//! well-separated nuclei on a bright eosin background. Pixels are rendered
//! through the stain model, so the hematoxylin channel recovers the nuclei.

use std::f64::consts::TAU;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imaging::{save_rgb, GrayImage, RgbPatch, StainMatrix, TileEntry, TileManifest};
use crate::label::Label;

pub const TILE_SIZE: usize = 256;
/// Tiles per row when laying a corpus out as a mosaic.
const GRID_COLS: usize = 10;

struct Canvas {
    size: usize,
    hema: Vec<f64>,
}

impl Canvas {
    fn new(size: usize) -> Self {
        Self {
            size,
            hema: vec![0.0; size * size],
        }
    }

    /// Draws a star-shaped nucleus; overlapping nuclei keep the denser value.
    #[allow(clippy::too_many_arguments)]
    fn nucleus(
        &mut self,
        cx: f64,
        cy: f64,
        radius: f64,
        harmonics: &[(f64, f64, f64)],
        density: f64,
        texture: f64,
        rng: &mut impl Rng,
    ) {
        let reach = radius * (1.0 + harmonics.iter().map(|h| h.1.abs()).sum::<f64>()) + 2.0;
        let x0 = (cx - reach).floor().max(0.0) as usize;
        let y0 = (cy - reach).floor().max(0.0) as usize;
        let x1 = ((cx + reach).ceil() as usize).min(self.size - 1);
        let y1 = ((cy + reach).ceil() as usize).min(self.size - 1);
        if cx + reach < 0.0 || cy + reach < 0.0 || x0 > x1 || y0 > y1 {
            return;
        }
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                let dist = (dx * dx + dy * dy).sqrt();
                let theta = dy.atan2(dx);
                let r = radius
                    * (1.0
                        + harmonics
                            .iter()
                            .map(|&(k, a, ph)| a * (k * theta + ph).cos())
                            .sum::<f64>());
                // soft boundary over ~1.5 px
                let edge = ((r - dist) / 1.5 + 0.5).clamp(0.0, 1.0);
                if edge <= 0.0 {
                    continue;
                }
                let shade = 1.0 - 0.25 * (dist / r).min(1.0).powi(2);
                let noise = if texture > 0.0 {
                    rng.gen_range(-texture..texture)
                } else {
                    0.0
                };
                let v = edge * (density * shade + noise).max(0.0);
                let cell = &mut self.hema[y * self.size + x];
                if v > *cell {
                    *cell = v;
                }
            }
        }
    }

    /// Lightens a small disc inside existing chromatin.
    fn vacuole(&mut self, cx: f64, cy: f64, radius: f64, level: f64) {
        let x0 = (cx - radius).floor().max(0.0) as usize;
        let y0 = (cy - radius).floor().max(0.0) as usize;
        let x1 = ((cx + radius).ceil().max(0.0) as usize).min(self.size - 1);
        let y1 = ((cy + radius).ceil().max(0.0) as usize).min(self.size - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                if dx * dx + dy * dy <= radius * radius {
                    let cell = &mut self.hema[y * self.size + x];
                    *cell = cell.min(level);
                }
            }
        }
    }
}

fn harmonics(rng: &mut impl Rng, max_amp: f64) -> Vec<(f64, f64, f64)> {
    [2.0, 3.0, 5.0]
        .iter()
        .map(|&k| (k, rng.gen_range(0.0..max_amp), rng.gen_range(0.0..TAU)))
        .collect()
}

fn draw_normal(canvas: &mut Canvas, rng: &mut impl Rng) {
    let size = canvas.size as f64;
    let target = rng.gen_range(12..22);
    let mut centers: Vec<(f64, f64, f64)> = Vec::new();
    let mut attempts = 0;
    while centers.len() < target && attempts < 2000 {
        attempts += 1;
        let r = rng.gen_range(5.0..8.5);
        let (x, y) = (rng.gen_range(r..size - r), rng.gen_range(r..size - r));
        if centers
            .iter()
            .all(|&(a, b, s)| ((a - x).powi(2) + (b - y).powi(2)).sqrt() > 2.2 * (r + s))
        {
            centers.push((x, y, r));
        }
    }
    for (x, y, r) in centers {
        let h = harmonics(rng, 0.04);
        let density = rng.gen_range(1.0..1.35);
        canvas.nucleus(x, y, r, &h, density, 0.03, rng);
    }
}

fn draw_tumor(canvas: &mut Canvas, rng: &mut impl Rng) {
    let size = canvas.size as f64;
    let clusters: Vec<(f64, f64)> = (0..rng.gen_range(3..6))
        .map(|_| (rng.gen_range(0.0..size), rng.gen_range(0.0..size)))
        .collect();
    let count = rng.gen_range(45..75);
    let mut placed = Vec::with_capacity(count);
    for _ in 0..count {
        let (ccx, ccy) = clusters[rng.gen_range(0..clusters.len())];
        let spread = 40.0;
        // sum of uniforms: a cheap bell-shaped offset
        let off = |rng: &mut dyn rand::RngCore| {
            (0..3).map(|_| rng.gen_range(-spread..spread)).sum::<f64>() / 1.5
        };
        let (x, y) = (ccx + off(rng), ccy + off(rng));
        let r = rng.gen_range(8.0..15.0);
        let h = harmonics(rng, 0.22);
        let density = rng.gen_range(0.75..1.4);
        canvas.nucleus(x, y, r, &h, density, 0.25, rng);
        placed.push((x, y, r));
    }
    for (x, y, r) in placed {
        for _ in 0..rng.gen_range(0..3) {
            let a = rng.gen_range(0.0..TAU);
            let d = rng.gen_range(0.0..0.5 * r);
            canvas.vacuole(
                x + d * a.cos(),
                y + d * a.sin(),
                rng.gen_range(1.2..2.8),
                rng.gen_range(0.1..0.35),
            );
        }
    }
}

/// Renders one tile of the given class, reproducible per `(seed, index)`.
pub fn generate_tile(label: Label, seed: u64, index: u64, stain: &StainMatrix) -> RgbPatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((u64::from(label.is_tumor()) << 48) | index);
    let mut canvas = Canvas::new(TILE_SIZE);
    match label {
        Label::Tumor => draw_tumor(&mut canvas, &mut rng),
        Label::Normal => draw_normal(&mut canvas, &mut rng),
    }

    // slowly varying eosin background
    let waves: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(0.01..0.05),
                rng.gen_range(0.01..0.05),
                rng.gen_range(0.0..TAU),
                rng.gen_range(0.02..0.06),
            )
        })
        .collect();
    let eosin_base = rng.gen_range(0.2..0.35);
    let n = TILE_SIZE * TILE_SIZE;
    let mut rgb = [vec![0u8; n], vec![0u8; n], vec![0u8; n]];
    for i in 0..n {
        let (x, y) = ((i % TILE_SIZE) as f64, (i / TILE_SIZE) as f64);
        let e = eosin_base
            + waves
                .iter()
                .map(|&(fx, fy, ph, a)| a * (fx * x + fy * y + ph).sin())
                .sum::<f64>()
            + rng.gen_range(-0.02..0.02);
        let h = canvas.hema[i] + rng.gen_range(0.0..0.02);
        let od = stain.mix([h, e.max(0.0), 0.0]);
        for (plane, d) in rgb.iter_mut().zip(od) {
            plane[i] = (255.0 * 10f64.powf(-d)).round().clamp(0.0, 255.0) as u8;
        }
    }
    let [r, g, b] = rgb;
    RgbPatch::new(TILE_SIZE, TILE_SIZE, r, g, b).expect("tile dimensions are consistent")
}

/// Writes `n_per_class` tiles of each class under `dir/tiles` plus a labeled
/// `dir/manifest.csv`. Tumor tiles come first; offsets place all tiles on a
/// mosaic ten tiles wide.
pub fn write_corpus(dir: impl AsRef<Path>, n_per_class: usize, seed: u64) -> Result<TileManifest> {
    if n_per_class == 0 {
        return Err(Error::Config(
            "synthetic corpus needs at least one tile per class".into(),
        ));
    }
    let dir = dir.as_ref();
    let tiles = dir.join("tiles");
    std::fs::create_dir_all(&tiles).map_err(|e| Error::io(&tiles, e))?;
    let stain = StainMatrix::default();
    let jobs: Vec<(Label, usize)> = [Label::Tumor, Label::Normal]
        .into_iter()
        .flat_map(|l| (0..n_per_class).map(move |i| (l, i)))
        .collect();
    let entries = jobs
        .par_iter()
        .enumerate()
        .map(|(slot, &(label, i))| {
            let id = format!("{label}_{i:04}");
            let path = tiles.join(format!("{id}.png"));
            save_rgb(&generate_tile(label, seed, i as u64, &stain), &path)?;
            Ok(TileEntry {
                id,
                path,
                x: ((slot % GRID_COLS) * TILE_SIZE) as u32,
                y: ((slot / GRID_COLS) * TILE_SIZE) as u32,
                label: Some(label),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = TileManifest::new(entries)?;
    manifest.write_csv(dir.join("manifest.csv"))?;
    Ok(manifest)
}

/// Normalized `bins`-bin histogram of a grayscale image; a simple stand-in
/// for externally supplied feature vectors.
pub fn intensity_histogram(img: &GrayImage, bins: usize) -> Vec<f64> {
    let bins = bins.clamp(1, 256);
    let mut h = vec![0.0; bins];
    for &v in img.as_raw() {
        h[v as usize * bins / 256] += 1.0;
    }
    let n = img.len() as f64;
    h.iter_mut().for_each(|v| *v /= n);
    h
}
