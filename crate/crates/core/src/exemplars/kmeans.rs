use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imaging::RgbPatch;

const MAX_ITERATIONS: usize = 50;

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum()
}

fn nearest(p: &[f64; 3], centers: &[[f64; 3]]) -> usize {
    let mut best = 0;
    for (j, c) in centers.iter().enumerate().skip(1) {
        if dist2(p, c) < dist2(p, &centers[best]) {
            best = j;
        }
    }
    best
}

fn seed_plus_plus(points: &[[f64; 3]], k: usize, rng: &mut impl Rng) -> Vec<[f64; 3]> {
    let mut chosen = vec![false; points.len()];
    let first = rng.gen_range(0..points.len());
    chosen[first] = true;
    let mut centers = vec![points[first]];
    while centers.len() < k {
        let weights: Vec<f64> = points
            .iter()
            .map(|p| {
                centers
                    .iter()
                    .map(|c| dist2(p, c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let next = match WeightedIndex::new(&weights) {
            Ok(w) => w.sample(rng),
            // every point coincides with a center: take the first unused one
            Err(_) => chosen
                .iter()
                .position(|c| !c)
                .expect("k <= number of points"),
        };
        chosen[next] = true;
        centers.push(points[next]);
    }
    centers
}

/// k-means (k-means++ seeding, at most 50 Lloyd iterations) on 3-vectors.
/// Returns, for each centroid, the index of the nearest not-yet-chosen point.
pub fn kmeans_select(points: &[[f64; 3]], k: usize, seed: u64) -> Result<Vec<usize>> {
    if points.is_empty() {
        return Err(Error::Data("k-means needs at least one patch".into()));
    }
    if k == 0 || k > points.len() {
        return Err(Error::Data(format!(
            "cannot form {k} clusters from {} patches",
            points.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = seed_plus_plus(points, k, &mut rng);
    let mut assign: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
    for _ in 0..MAX_ITERATIONS {
        let mut sums = vec![[0.0; 3]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assign) {
            for i in 0..3 {
                sums[a][i] += p[i];
            }
            counts[a] += 1;
        }
        for j in 0..k {
            // empty clusters keep their previous centroid
            if counts[j] > 0 {
                centers[j] = sums[j].map(|s| s / counts[j] as f64);
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
        if next == assign {
            break;
        }
        assign = next;
    }

    let mut used = vec![false; points.len()];
    let mut out = Vec::with_capacity(k);
    for c in &centers {
        let best = (0..points.len())
            .filter(|&i| !used[i])
            .min_by(|&i, &j| {
                dist2(&points[i], c)
                    .total_cmp(&dist2(&points[j], c))
                    .then(i.cmp(&j))
            })
            .expect("k <= number of points");
        used[best] = true;
        out.push(best);
    }
    Ok(out)
}

/// Clusters patches by mean RGB and returns the id nearest each centroid.
pub fn kmeans_exemplars(
    patches: &[(String, RgbPatch)],
    q: usize,
    seed: u64,
) -> Result<Vec<String>> {
    let points: Vec<[f64; 3]> = patches.iter().map(|(_, p)| p.mean_rgb()).collect();
    Ok(kmeans_select(&points, q, seed)?
        .into_iter()
        .map(|i| patches[i].0.clone())
        .collect())
}
