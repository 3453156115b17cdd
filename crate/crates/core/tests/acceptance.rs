//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any criterion fails.

use std::collections::VecDeque;
use std::time::Instant;

use phseg_core::exemplars::{build_exemplar_set, iqr_bin_select, ScoreRow, ScoreTable};
use phseg_core::imaging::Dihedral;
use phseg_core::metrics::{bench_tiles, evaluate, prf1, specificity};
use phseg_core::segmenter::{
    classify_distances, ensemble_predict, segment, AccurateModels, SegmentOutcome,
};
use phseg_core::synth::{generate_tile, intensity_histogram, write_corpus};
use phseg_core::{
    load_tile, php, sym_kl, Beta1Mode, BinaryMask, Confusion, Distribution, ExemplarSet,
    FastConfig, FeatureTable, Filtration, ForestConfig, GrayImage, Label, Pipeline,
    ProfileExtractor, RegressionForest, Segmenter, SelectionMethod, StainMatrix, Tile,
    TileManifest,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn text(e: phseg_core::Error) -> String {
    e.to_string()
}

/// Breadth-first labelling; counts components of `want` pixels and how many
/// of them touch the image border.
fn flood_components(mask: &BinaryMask, want: bool, eight: bool) -> (usize, usize) {
    let (w, h) = (mask.width(), mask.height());
    let mut seen = vec![false; w * h];
    let (mut total, mut touching) = (0, 0);
    let offsets: &[(isize, isize)] = if eight {
        &[
            (-1, -1),
            (0, -1),
            (1, -1),
            (-1, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ]
    } else {
        &[(0, -1), (-1, 0), (1, 0), (0, 1)]
    };
    for start in 0..w * h {
        if seen[start] || mask.get(start % w, start / w) != want {
            continue;
        }
        total += 1;
        let mut border = false;
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            if x == 0 || y == 0 || x as usize == w - 1 || y as usize == h - 1 {
                border = true;
            }
            for &(dx, dy) in offsets {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !seen[j] && mask.get(nx as usize, ny as usize) == want {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        if border {
            touching += 1;
        }
    }
    (total, touching)
}

fn oracle_betti(img: &GrayImage, t: u16) -> (u32, u32) {
    let mask = BinaryMask::from_fn(img.width(), img.height(), |x, y| {
        u16::from(img.get(x, y)) < t
    });
    let (b0, _) = flood_components(&mask, true, true);
    let (holes, open) = flood_components(&mask, false, false);
    (b0 as u32, (holes - open) as u32)
}

fn c1_oracle() -> Outcome {
    let start = Instant::now();
    let f = Filtration::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut mismatches = 0;
    let mut masks = 0;
    for _ in 0..1000 {
        let img = GrayImage::from_fn(32, 32, |_, _| rng.gen()).unwrap();
        let curves = php(&img, &f).curves().clone();
        for (i, &t) in f.thresholds().iter().enumerate() {
            masks += 1;
            if oracle_betti(&img, t) != (curves.beta0[i], curves.beta1[i]) {
                mismatches += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        mismatches == 0 && secs < 30.0,
        format!("{mismatches} mismatches over {masks} masks in {secs:.2} s"),
    )
}

fn c2_shapes() -> Outcome {
    let betti = |m: &BinaryMask| {
        (
            phseg_core::betti0(m),
            phseg_core::betti1(m, Beta1Mode::BoundedVoids),
        )
    };
    let empty = BinaryMask::from_fn(5, 5, |_, _| false);
    let full = BinaryMask::from_fn(5, 5, |_, _| true);
    let annulus = BinaryMask::from_fn(5, 5, |x, y| !(x == 2 && y == 2));
    let diagonal = BinaryMask::from_fn(4, 4, |x, y| (x, y) == (1, 1) || (x, y) == (2, 2));
    let got = [
        betti(&empty),
        betti(&full),
        betti(&annulus),
        betti(&diagonal),
    ];
    check(
        got == [(0, 0), (1, 0), (1, 1), (1, 0)],
        format!("empty/full/annulus/diagonal pair = {got:?}"),
    )
}

fn c3_dihedral() -> Outcome {
    let stain = StainMatrix::default();
    let ex = ProfileExtractor::default();
    let mut broken = 0;
    for i in 0..100u64 {
        let label = if i % 2 == 0 {
            Label::Tumor
        } else {
            Label::Normal
        };
        let gray = ex
            .substrate(&Tile::Rgb(generate_tile(label, 33, i, &stain)))
            .map_err(text)?;
        let base = ex.profile_gray(&gray);
        if Dihedral::ALL
            .iter()
            .any(|&d| ex.profile_gray(&gray.transform(d)) != base)
        {
            broken += 1;
        }
    }
    check(
        broken == 0,
        format!("{broken}/100 tiles changed under some symmetry"),
    )
}

fn c4_divergence() -> Outcome {
    let p = Distribution::new(vec![0.5, 0.5]).map_err(text)?;
    let q = Distribution::new(vec![0.25, 0.75]).map_err(text)?;
    let d = sym_kl(&p, &q).map_err(text)?;
    let swapped = sym_kl(&q, &p).map_err(text)?;
    let own = sym_kl(&p, &p).map_err(text)?;
    check(
        (d - 0.27465).abs() <= 1e-5 && d == swapped && own == 0.0,
        format!("sym_kl = {d:.6}, swapped = {swapped:.6}, self = {own}"),
    )
}

fn c5_worked_case() -> Outcome {
    let cfg = FastConfig { c: 0.2, k: 3 };
    let d = classify_distances(&[0.0, 5.0, 9.0], &[4.0, 6.0, 7.0], &cfg).map_err(text)?;
    check(
        d.label == Label::Tumor
            && (d.score_t - 1.3679).abs() <= 1e-4
            && (d.score_n - 0.4493).abs() <= 1e-4,
        format!(
            "{} with tumor {:.4} vs normal {:.4}",
            d.label, d.score_t, d.score_n
        ),
    )
}

fn c6_branch_table() -> Outcome {
    let cases = [
        ((0.9, 0.8), Label::Tumor),
        ((0.2, 0.3), Label::Normal),
        ((0.48, 0.52), Label::Normal),
    ];
    let mut ok = true;
    let mut shown = Vec::new();
    for ((o1, o2), want) in cases {
        let got = ensemble_predict(o1, o2).map_err(text)?;
        ok &= got == want;
        shown.push(format!("({o1},{o2})->{got}"));
    }
    check(ok, shown.join(" "))
}

/// Products of the synthetic experiment reused by the runtime check.
struct Synthetic {
    exemplars: ExemplarSet,
    held_out: Vec<(String, Tile)>,
}

/// Keeps the entries whose within-class index passes `keep`; the corpus lists
/// one class after the other with equal counts.
fn subset(manifest: &TileManifest, keep: impl Fn(usize) -> bool) -> TileManifest {
    let per_class = manifest.len() / 2;
    let entries = manifest
        .iter()
        .enumerate()
        .filter(|(i, _)| keep(i % per_class))
        .map(|(_, e)| e.clone())
        .collect();
    TileManifest::new(entries).unwrap()
}

fn f1_of(outcome: &SegmentOutcome, truth: &TileManifest) -> Result<f64, String> {
    if !outcome.is_complete() {
        return Err(format!("{} tiles failed", outcome.failures.len()));
    }
    evaluate(&outcome.decisions, truth)
        .map(|r| r.f1)
        .map_err(text)
}

fn c7_synthetic(state: &mut Option<Synthetic>) -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = write_corpus(dir.path(), 200, 2024).map_err(text)?;
    let train = subset(&manifest, |i| i < 100);
    let test = subset(&manifest, |i| i >= 100);
    let ex = ProfileExtractor::default();

    let mut table = FeatureTable::default();
    let mut rows = Vec::new();
    let (mut x_php, mut x_hist, mut y) = (Vec::new(), Vec::new(), Vec::new());
    let mut held_out = Vec::new();
    for e in manifest.iter() {
        let tile = load_tile(&e.path).map_err(text)?;
        let gray = ex.substrate(&tile).map_err(text)?;
        let hist = intensity_histogram(&gray, 16);
        table
            .push(e.id.clone(), hist.clone(), e.label)
            .map_err(text)?;
        let label = e.label.ok_or("corpus tile without label")?;
        if train.get(&e.id).is_some() {
            rows.push(ScoreRow {
                patch_id: e.id.clone(),
                label,
                score: gray.mean(),
            });
            x_php.push(ex.profile_gray(&gray).feature_vector());
            x_hist.push(hist);
            y.push(label.target());
        } else {
            held_out.push((e.id.clone(), tile));
        }
    }

    let scores = ScoreTable::new(rows).map_err(text)?;
    let tumor_ids = iqr_bin_select(&scores, Label::Tumor, 64).map_err(text)?;
    let normal_ids = iqr_bin_select(&scores, Label::Normal, 64).map_err(text)?;
    let exemplars = build_exemplar_set(
        &train,
        &tumor_ids,
        &normal_ids,
        &ex,
        SelectionMethod::Scores,
        None,
    )
    .map_err(text)?;
    let fast = Segmenter::new(
        ex.clone(),
        Pipeline::Fast {
            exemplars: exemplars.clone(),
            config: FastConfig::default(),
        },
    )
    .map_err(text)?;
    let f1_fast = f1_of(&segment(&test, &fast), &test)?;

    let cfg = ForestConfig {
        seed: 7,
        ..ForestConfig::default()
    };
    let php_forest = RegressionForest::train(&x_php, &y, &cfg).map_err(text)?;
    let hist_forest = RegressionForest::train(&x_hist, &y, &cfg).map_err(text)?;
    let models = AccurateModels::new(php_forest, hist_forest, table).map_err(text)?;
    let accurate = Segmenter::new(ex, Pipeline::Accurate(models)).map_err(text)?;
    let f1_acc = f1_of(&segment(&test, &accurate), &test)?;

    let secs = start.elapsed().as_secs_f64();
    *state = Some(Synthetic {
        exemplars,
        held_out,
    });
    check(
        f1_fast >= 0.90 && f1_acc >= f1_fast - 0.02 && secs < 300.0,
        format!("fast F1 {f1_fast:.4}, accurate F1 {f1_acc:.4}, {secs:.1} s"),
    )
}

fn c8_runtime(state: &Option<Synthetic>) -> Outcome {
    let Some(s) = state else {
        return Err("synthetic exemplars unavailable".into());
    };
    let seg = Segmenter::new(
        ProfileExtractor::default(),
        Pipeline::Fast {
            exemplars: s.exemplars.clone(),
            config: FastConfig::default(),
        },
    )
    .map_err(text)?;
    let tiles: Vec<_> = s.held_out.iter().step_by(10).cloned().collect();
    let report = bench_tiles(&tiles, &seg, 5, 1).map_err(text)?;
    let st = &report.stages;
    check(
        report.total.median_ms <= 30.0,
        format!(
            "median {:.2} ms over {} runs (deconvolution {:.2}, filtration {:.2}, betti {:.2}, classify {:.2})",
            report.total.median_ms,
            report.samples_ms.len(),
            st.deconvolution.median_ms,
            st.filtration.median_ms,
            st.betti.median_ms,
            st.classify.median_ms
        ),
    )
}

fn c9_forest() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x: Vec<Vec<f64>> = (0..600)
        .map(|_| (0..3).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let y: Vec<f64> = x.iter().map(|r| r[0]).collect();
    let cfg = ForestConfig {
        seed: 42,
        n_trees: 100,
        ..ForestConfig::default()
    };
    let (train_x, test_x) = x.split_at(400);
    let (train_y, test_y) = y.split_at(400);
    let a = RegressionForest::train(train_x, train_y, &cfg).map_err(text)?;
    let b = RegressionForest::train(train_x, train_y, &cfg).map_err(text)?;
    let same = a.to_json_string() == b.to_json_string();
    let n = test_y.len() as f64;
    let mean = test_y.iter().sum::<f64>() / n;
    let var = test_y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let mut mse = 0.0;
    for (r, t) in test_x.iter().zip(test_y) {
        mse += (a.predict(r).map_err(text)? - t).powi(2) / n;
    }
    check(
        same && mse < 0.25 * var,
        format!(
            "identical serializations: {same}; holdout MSE {mse:.5} vs 0.25*var {:.5}",
            0.25 * var
        ),
    )
}

fn c10_metrics() -> Outcome {
    let (p, r, f1) = prf1(&Confusion::new(9, 1, 3, 0));
    let tnr = specificity(&Confusion::new(0, 2, 0, 8));
    check(
        p == 0.9 && r == 0.75 && (f1 - 0.81818).abs() <= 1e-5 && tnr == 0.8,
        format!("prf1 = ({p}, {r}, {f1:.5}), specificity = {tnr}"),
    )
}

fn main() {
    let mut synthetic = None;
    let results: Vec<(&str, Outcome)> = vec![
        ("1 betti oracle equivalence", c1_oracle()),
        ("2 topological unit shapes", c2_shapes()),
        ("3 dihedral invariance", c3_dihedral()),
        ("4 divergence arithmetic", c4_divergence()),
        ("5 fast classifier worked case", c5_worked_case()),
        ("6 ensemble branch table", c6_branch_table()),
        ("7 synthetic discrimination", c7_synthetic(&mut synthetic)),
        ("8 per-patch runtime", c8_runtime(&synthetic)),
        ("9 forest determinism and fit", c9_forest()),
        ("10 metric formulas", c10_metrics()),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
