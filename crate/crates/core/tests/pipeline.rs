use phseg_core::exemplars::{build_exemplar_set, ExemplarSet, MANIFEST_FILE};
use phseg_core::segmenter::{
    read_decisions, segment, write_decisions, AccurateModels, ProbabilityMap,
};
use phseg_core::synth::{intensity_histogram, write_corpus};
use phseg_core::{
    load_tile, FastConfig, FeatureTable, ForestConfig, Label, Pipeline, ProfileExtractor,
    RegressionForest, Segmenter, SelectionMethod, TileEntry, TileManifest,
};

fn ids(manifest: &TileManifest, label: Label, n: usize) -> Vec<String> {
    manifest
        .with_label(label)
        .take(n)
        .map(|e| e.id.clone())
        .collect()
}

/// Four tiles laid out on a 2x2 mosaic.
fn square(manifest: &TileManifest) -> TileManifest {
    let picks = [
        ("tumor_0000", 0, 0),
        ("normal_0000", 256, 0),
        ("normal_0001", 0, 256),
        ("tumor_0001", 256, 256),
    ];
    let entries = picks
        .iter()
        .map(|&(id, x, y)| TileEntry {
            x,
            y,
            ..manifest.get(id).unwrap().clone()
        })
        .collect();
    TileManifest::new(entries).unwrap()
}

fn fast_segmenter(manifest: &TileManifest) -> Segmenter {
    let ex = ProfileExtractor::default();
    let set = build_exemplar_set(
        manifest,
        &ids(manifest, Label::Tumor, 3),
        &ids(manifest, Label::Normal, 3),
        &ex,
        SelectionMethod::Manual,
        None,
    )
    .unwrap();
    Segmenter::new(
        ex,
        Pipeline::Fast {
            exemplars: set,
            config: FastConfig { c: 0.2, k: 3 },
        },
    )
    .unwrap()
}

#[test]
fn exemplar_set_survives_save_and_load() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_corpus(dir.path().join("corpus"), 4, 11).unwrap();
    let set = build_exemplar_set(
        &manifest,
        &ids(&manifest, Label::Tumor, 2),
        &ids(&manifest, Label::Normal, 2),
        &ProfileExtractor::default(),
        SelectionMethod::Random,
        Some(5),
    )
    .unwrap();
    let out = dir.path().join("ex");
    let written = set.save(&out).unwrap();
    assert_eq!(written, out.join(MANIFEST_FILE));
    assert!(out.join("profiles").join("tumor_tumor_0000.csv").exists());
    assert_eq!(ExemplarSet::load(&written).unwrap(), set);
    assert_eq!(ExemplarSet::load(&out).unwrap(), set);
}

#[test]
fn unknown_exemplar_id_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_corpus(dir.path(), 2, 1).unwrap();
    let err = build_exemplar_set(
        &manifest,
        &["missing".to_string()],
        &ids(&manifest, Label::Normal, 1),
        &ProfileExtractor::default(),
        SelectionMethod::Manual,
        None,
    )
    .unwrap_err();
    assert!(err.to_string().contains("missing"), "{err}");
}

#[test]
fn four_tiles_fill_a_two_by_two_map() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path(), 4, 3).unwrap();
    let seg = fast_segmenter(&corpus);
    let outcome = segment(&square(&corpus), &seg);
    assert!(outcome.is_complete());
    assert_eq!(outcome.decisions.len(), 4);

    let map = ProbabilityMap::from_decisions(&outcome.decisions);
    assert_eq!((map.cols(), map.rows()), (2, 2));
    let grid = map.label_grid();
    assert_eq!(grid.lines().count(), 2);
    assert!(grid
        .lines()
        .all(|l| l.len() == 2 && l.chars().all(|c| c == '0' || c == '1')));

    let csv = dir.path().join("decisions.csv");
    write_decisions(&csv, &outcome.decisions).unwrap();
    assert_eq!(read_decisions(&csv).unwrap(), outcome.decisions);
}

#[test]
fn unreadable_tile_is_reported_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path(), 2, 3).unwrap();
    let mut entries = corpus.entries().to_vec();
    entries.push(TileEntry {
        id: "ghost".into(),
        path: dir.path().join("nope.png"),
        x: 9999,
        y: 0,
        label: None,
    });
    let outcome = segment(
        &TileManifest::new(entries).unwrap(),
        &fast_segmenter(&corpus),
    );
    assert_eq!(outcome.decisions.len(), 4);
    assert_eq!(outcome.failures.len(), 1);
    assert_eq!(outcome.failures[0].tile_id, "ghost");
}

#[test]
fn both_pipelines_write_the_same_schema() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path(), 6, 8).unwrap();
    let ex = ProfileExtractor::default();
    let mut table = FeatureTable::default();
    let (mut xp, mut xf, mut y) = (Vec::new(), Vec::new(), Vec::new());
    for e in corpus.iter() {
        let gray = ex.substrate(&load_tile(&e.path).unwrap()).unwrap();
        let hist = intensity_histogram(&gray, 8);
        table.push(e.id.clone(), hist.clone(), e.label).unwrap();
        xp.push(ex.profile_gray(&gray).feature_vector());
        xf.push(hist);
        y.push(e.label.unwrap().target());
    }
    let cfg = ForestConfig {
        n_trees: 10,
        ..ForestConfig::default()
    };
    let models = AccurateModels::new(
        RegressionForest::train(&xp, &y, &cfg).unwrap(),
        RegressionForest::train(&xf, &y, &cfg).unwrap(),
        table,
    )
    .unwrap();
    let accurate = Segmenter::new(ex, Pipeline::Accurate(models)).unwrap();

    let grid = square(&corpus);
    let header = |seg: &Segmenter, name: &str| {
        let path = dir.path().join(name);
        write_decisions(&path, &segment(&grid, seg).decisions).unwrap();
        std::fs::read_to_string(path)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string()
    };
    let fast = header(&fast_segmenter(&corpus), "fast.csv");
    assert_eq!(fast, "tile_id,x,y,label,score_t,score_n,prob");
    assert_eq!(header(&accurate, "accurate.csv"), fast);
}

#[test]
fn synthetic_classes_separate_on_late_components() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path(), 20, 99).unwrap();
    let ex = ProfileExtractor::default();
    let mass = |label: Label| -> Vec<f64> {
        corpus
            .with_label(label)
            .map(|e| {
                let p = ex.profile(&load_tile(&e.path).unwrap()).unwrap();
                let t = p.filtration().thresholds();
                p.p0()
                    .as_slice()
                    .iter()
                    .zip(t)
                    .filter(|(_, &t)| t >= 128)
                    .map(|(v, _)| v)
                    .sum()
            })
            .collect()
    };
    let stats = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (
            m,
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64,
        )
    };
    let (mt, vt) = stats(&mass(Label::Tumor));
    let (mn, vn) = stats(&mass(Label::Normal));
    let pooled = ((vt + vn) / 2.0).sqrt();
    assert!(
        (mt - mn).abs() >= 2.0 * pooled,
        "tumor {mt:.3} normal {mn:.3} sd {pooled:.3}"
    );
}

#[test]
fn corpus_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ma = write_corpus(a.path(), 2, 5).unwrap();
    let mb = write_corpus(b.path(), 2, 5).unwrap();
    for (x, y) in ma.iter().zip(mb.iter()) {
        assert_eq!(x.id, y.id);
        assert_eq!(load_tile(&x.path).unwrap(), load_tile(&y.path).unwrap());
    }
}
