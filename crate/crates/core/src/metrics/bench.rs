use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::homology::{betti_curves, PHProfile, PixelOrder};
use crate::imaging::{load_tile, Tile, TileManifest};
use crate::segmenter::Segmenter;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p95_ms: f64,
}

impl LatencyStats {
    pub fn from_samples(samples_ms: &[f64]) -> Self {
        if samples_ms.is_empty() {
            return Self {
                mean_ms: 0.0,
                median_ms: 0.0,
                p95_ms: 0.0,
            };
        }
        let mut s = samples_ms.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        let median = if n % 2 == 1 {
            s[n / 2]
        } else {
            (s[n / 2 - 1] + s[n / 2]) / 2.0
        };
        // nearest rank
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        Self {
            mean_ms: s.iter().sum::<f64>() / n as f64,
            median_ms: median,
            p95_ms: s[rank - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageBreakdown {
    pub deconvolution: LatencyStats,
    pub filtration: LatencyStats,
    pub betti: LatencyStats,
    pub classify: LatencyStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub pipeline: String,
    pub tiles: usize,
    pub repetitions: usize,
    pub warmup: usize,
    /// Per-patch wall time of every timed run, in tile-major order.
    pub samples_ms: Vec<f64>,
    pub total: LatencyStats,
    pub stages: StageBreakdown,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Times the per-patch pipeline on the calling thread. Tiles are decoded once
/// up front; each timed run covers deconvolution, filtration ordering, Betti
/// curves and classification.
pub fn bench(
    manifest: &TileManifest,
    segmenter: &Segmenter,
    repetitions: usize,
    warmup: usize,
) -> Result<BenchReport> {
    let tiles: Vec<(String, Tile)> = manifest
        .iter()
        .map(|e| Ok((e.id.clone(), load_tile(&e.path)?)))
        .collect::<Result<_>>()?;
    bench_tiles(&tiles, segmenter, repetitions, warmup)
}

pub fn bench_tiles(
    tiles: &[(String, Tile)],
    segmenter: &Segmenter,
    repetitions: usize,
    warmup: usize,
) -> Result<BenchReport> {
    let ex = segmenter.extractor();
    let run = |id: &str, tile: &Tile| -> Result<[f64; 4]> {
        let t0 = Instant::now();
        let gray = ex.substrate(tile)?;
        let d0 = ms(t0);
        let t1 = Instant::now();
        let order = PixelOrder::new(&gray);
        let d1 = ms(t1);
        let t2 = Instant::now();
        let curves = betti_curves(&order, &ex.filtration, ex.beta1_mode);
        let profile = PHProfile::from_curves(ex.filtration.clone(), curves)?;
        let d2 = ms(t2);
        let t3 = Instant::now();
        std::hint::black_box(segmenter.classify_profile(id, &profile)?);
        let d3 = ms(t3);
        Ok([d0, d1, d2, d3])
    };

    for _ in 0..warmup {
        for (id, tile) in tiles {
            run(id, tile)?;
        }
    }
    let mut stages: [Vec<f64>; 4] = Default::default();
    let mut samples = Vec::with_capacity(tiles.len() * repetitions);
    for (id, tile) in tiles {
        for _ in 0..repetitions {
            let t = Instant::now();
            let parts = run(id, tile)?;
            samples.push(ms(t));
            for (s, v) in stages.iter_mut().zip(parts) {
                s.push(v);
            }
        }
    }
    Ok(BenchReport {
        pipeline: segmenter.pipeline().name().to_string(),
        tiles: tiles.len(),
        repetitions,
        warmup,
        total: LatencyStats::from_samples(&samples),
        samples_ms: samples,
        stages: StageBreakdown {
            deconvolution: LatencyStats::from_samples(&stages[0]),
            filtration: LatencyStats::from_samples(&stages[1]),
            betti: LatencyStats::from_samples(&stages[2]),
            classify: LatencyStats::from_samples(&stages[3]),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_arithmetic() {
        let s = LatencyStats::from_samples(&[1.0, 1.0, 1.0, 2.0, 10.0]);
        assert_eq!(s.median_ms, 1.0);
        assert_eq!(s.mean_ms, 3.0);
        assert!(s.median_ms <= s.mean_ms);
        assert_eq!(s.p95_ms, 10.0);
        let even = LatencyStats::from_samples(&[4.0, 1.0, 3.0, 2.0]);
        assert_eq!(even.median_ms, 2.5);
        assert_eq!(LatencyStats::from_samples(&[]).mean_ms, 0.0);
    }
}
