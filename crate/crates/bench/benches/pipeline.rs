use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use phseg_bench::{fast_segmenter, forest_config, histogram_rows, tiles};
use phseg_core::homology::{betti_curves, PixelOrder};
use phseg_core::segmenter::classify_fast;
use phseg_core::{hematoxylin_channel, Pipeline, ProfileExtractor, RegressionForest, Tile};

fn per_patch(c: &mut Criterion) {
    let segmenter = fast_segmenter(64, 1).expect("fixture");
    let Pipeline::Fast { exemplars, config } = segmenter.pipeline() else {
        unreachable!("fast fixture")
    };
    let ex = ProfileExtractor::default();
    let (id, patch) = tiles(1, 99).remove(0);
    let gray = hematoxylin_channel(&patch, &ex.stain, ex.c_max).unwrap();
    let order = PixelOrder::new(&gray);
    let profile = ex.profile_gray(&gray);
    let tile = Tile::Rgb(patch.clone());

    let mut group = c.benchmark_group("per_patch_256");
    group.bench_function("deconvolution", |b| {
        b.iter(|| hematoxylin_channel(black_box(&patch), &ex.stain, ex.c_max).unwrap())
    });
    group.bench_function("filtration_order", |b| {
        b.iter(|| PixelOrder::new(black_box(&gray)))
    });
    group.bench_function("betti_curves", |b| {
        b.iter(|| betti_curves(black_box(&order), &ex.filtration, ex.beta1_mode))
    });
    group.bench_function("classify_fast_128", |b| {
        b.iter(|| classify_fast(black_box(&profile), exemplars, config).unwrap())
    });
    group.bench_function("end_to_end_fast", |b| {
        b.iter(|| segmenter.classify_tile(&id, black_box(&tile)).unwrap())
    });
    group.finish();
}

fn forest(c: &mut Criterion) {
    let (rows, targets) = histogram_rows(200, 3).expect("fixture");
    let mut group = c.benchmark_group("forest");
    group.sample_size(10);
    for n_trees in [50, 200] {
        let cfg = forest_config(n_trees, 3);
        group.bench_with_input(BenchmarkId::new("train_200x16", n_trees), &cfg, |b, cfg| {
            b.iter(|| RegressionForest::train(black_box(&rows), &targets, cfg).unwrap())
        });
    }
    let model = RegressionForest::train(&rows, &targets, &forest_config(200, 3)).unwrap();
    group.bench_function("predict_200_trees", |b| {
        b.iter(|| model.predict(black_box(&rows[0])).unwrap())
    });
    group.finish();
}

criterion_group!(benches, per_patch, forest);
criterion_main!(benches);
