use std::fmt::Write as _;
use std::path::Path;

use super::pipeline::TileDecision;
use crate::error::{Error, Result};
use crate::imaging::{load_tile, RgbPatch, TileManifest};
use crate::label::Label;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapCell {
    pub label: Label,
    pub prob: f64,
}

/// Per-tile decisions laid out on the grid of distinct tile offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMap {
    /// Distinct x offsets (columns) and y offsets (rows), ascending.
    pub xs: Vec<u32>,
    pub ys: Vec<u32>,
    /// Row-major; `None` where no decision exists.
    pub cells: Vec<Option<MapCell>>,
}

impl ProbabilityMap {
    pub fn from_decisions(decisions: &[TileDecision]) -> Self {
        let mut xs: Vec<u32> = decisions.iter().map(|d| d.x).collect();
        let mut ys: Vec<u32> = decisions.iter().map(|d| d.y).collect();
        xs.sort_unstable();
        xs.dedup();
        ys.sort_unstable();
        ys.dedup();
        let mut cells = vec![None; xs.len() * ys.len()];
        for d in decisions {
            let col = xs.binary_search(&d.x).expect("offset collected above");
            let row = ys.binary_search(&d.y).expect("offset collected above");
            let prob = d
                .decision
                .prob
                .unwrap_or_else(|| d.decision.label.target())
                .clamp(0.0, 1.0);
            cells[row * xs.len() + col] = Some(MapCell {
                label: d.decision.label,
                prob,
            });
        }
        Self { xs, ys, cells }
    }

    pub fn cols(&self) -> usize {
        self.xs.len()
    }

    pub fn rows(&self) -> usize {
        self.ys.len()
    }

    pub fn get(&self, col: usize, row: usize) -> Option<MapCell> {
        self.cells[row * self.cols() + col]
    }

    /// One text line per grid row: `1` tumor, `0` normal, `.` missing.
    pub fn label_grid(&self) -> String {
        let mut s = String::with_capacity(self.cells.len() + self.rows());
        for row in 0..self.rows() {
            for col in 0..self.cols() {
                s.push(match self.get(col, row) {
                    Some(c) if c.label == Label::Tumor => '1',
                    Some(_) => '0',
                    None => '.',
                });
            }
            s.push('\n');
        }
        s
    }

    /// Probability grid as CSV, empty fields for missing tiles.
    pub fn probability_csv(&self) -> String {
        let mut s = String::new();
        for row in 0..self.rows() {
            let line: Vec<String> = (0..self.cols())
                .map(|col| {
                    self.get(col, row)
                        .map(|c| format!("{:.6}", c.prob))
                        .unwrap_or_default()
                })
                .collect();
            let _ = writeln!(s, "{}", line.join(","));
        }
        s
    }
}

/// Mosaic of the tiles at their offsets, downsampled by `downsample`, with
/// tumor tiles tinted red. Unreadable or undecided tiles stay black.
pub fn render_overlay(
    manifest: &TileManifest,
    decisions: &[TileDecision],
    downsample: usize,
) -> Result<RgbPatch> {
    if downsample == 0 {
        return Err(Error::Config(
            "overlay downsample factor must be at least 1".into(),
        ));
    }
    let by_id: std::collections::HashMap<&str, &TileDecision> =
        decisions.iter().map(|d| (d.tile_id.as_str(), d)).collect();
    let mut tiles = Vec::new();
    let (mut w, mut h) = (1usize, 1usize);
    for e in manifest {
        let Some(d) = by_id.get(e.id.as_str()) else {
            continue;
        };
        let Ok(tile) = load_tile(&e.path) else {
            continue;
        };
        let rgb = tile.to_rgb();
        w = w.max((e.x as usize + rgb.width()).div_ceil(downsample));
        h = h.max((e.y as usize + rgb.height()).div_ceil(downsample));
        tiles.push((e.x as usize, e.y as usize, rgb, d.decision.label));
    }
    let mut canvas = vec![0u8; w * h * 3];
    for (x0, y0, rgb, label) in tiles {
        for ty in (0..rgb.height()).step_by(downsample) {
            for tx in (0..rgb.width()).step_by(downsample) {
                let (cx, cy) = ((x0 + tx) / downsample, (y0 + ty) / downsample);
                if cx >= w || cy >= h {
                    continue;
                }
                let mut px = rgb.pixel(tx, ty);
                if label == Label::Tumor {
                    px = [((u16::from(px[0]) + 255) / 2) as u8, px[1] / 2, px[2] / 2];
                }
                canvas[(cy * w + cx) * 3..(cy * w + cx) * 3 + 3].copy_from_slice(&px);
            }
        }
    }
    RgbPatch::from_interleaved(w, h, &canvas)
}

pub fn write_overlay(path: impl AsRef<Path>, overlay: &RgbPatch) -> Result<()> {
    crate::imaging::save_rgb(overlay, path)
}
