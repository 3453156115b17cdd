use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::{classify_fast, ensemble_predict, FastConfig, PatchDecision};
use crate::error::{Error, Result};
use crate::exemplars::ExemplarSet;
use crate::forest::{FeatureTable, RegressionForest};
use crate::homology::{PHProfile, ProfileExtractor};
use crate::imaging::{load_tile, Tile, TileManifest};
use crate::label::Label;

/// The profile-forest / feature-forest pair plus the external feature vectors
/// they are applied to.
#[derive(Debug, Clone)]
pub struct AccurateModels {
    pub php_forest: RegressionForest,
    pub feature_forest: RegressionForest,
    features: FeatureTable,
    index: HashMap<String, usize>,
}

impl AccurateModels {
    pub fn new(
        php_forest: RegressionForest,
        feature_forest: RegressionForest,
        features: FeatureTable,
    ) -> Result<Self> {
        if !features.is_empty() && features.dim() != feature_forest.n_features() {
            return Err(Error::Data(format!(
                "feature vectors have {} values, feature forest expects {}",
                features.dim(),
                feature_forest.n_features()
            )));
        }
        let index = features
            .ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        Ok(Self {
            php_forest,
            feature_forest,
            features,
            index,
        })
    }

    pub fn features_for(&self, id: &str) -> Result<&[f64]> {
        self.index
            .get(id)
            .map(|&i| self.features.rows[i].as_slice())
            .ok_or_else(|| Error::Data(format!("no external feature vector for tile {id:?}")))
    }

    pub fn decide(&self, id: &str, profile: &PHProfile) -> Result<PatchDecision> {
        let o1 = self.php_forest.predict(&profile.feature_vector())?;
        let o2 = self.feature_forest.predict(self.features_for(id)?)?;
        Ok(PatchDecision {
            label: ensemble_predict(o1, o2)?,
            score_t: o1,
            score_n: o2,
            prob: Some((o1 + o2) / 2.0),
        })
    }
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Pipeline {
    Fast {
        exemplars: ExemplarSet,
        config: FastConfig,
    },
    Accurate(AccurateModels),
}

impl Pipeline {
    pub fn name(&self) -> &'static str {
        match self {
            Pipeline::Fast { .. } => "fast",
            Pipeline::Accurate(_) => "accurate",
        }
    }
}

/// Tile → profile → decision.
#[derive(Debug, Clone)]
pub struct Segmenter {
    extractor: ProfileExtractor,
    pipeline: Pipeline,
}

impl Segmenter {
    pub fn new(extractor: ProfileExtractor, pipeline: Pipeline) -> Result<Self> {
        match &pipeline {
            Pipeline::Fast { exemplars, config } => {
                config.validate()?;
                if exemplars.filtration() != &extractor.filtration {
                    return Err(Error::Config(
                        "exemplar set was built with a different filtration".into(),
                    ));
                }
                if config.k > exemplars.len() {
                    return Err(Error::Config(format!(
                        "k = {} exceeds the {} exemplars",
                        config.k,
                        exemplars.len()
                    )));
                }
            }
            Pipeline::Accurate(m) => {
                if m.php_forest.n_features() != extractor.filtration.feature_len() {
                    return Err(Error::Config(format!(
                        "profile forest expects {} features, the filtration yields {}",
                        m.php_forest.n_features(),
                        extractor.filtration.feature_len()
                    )));
                }
            }
        }
        Ok(Self {
            extractor,
            pipeline,
        })
    }

    pub fn extractor(&self) -> &ProfileExtractor {
        &self.extractor
    }

    pub fn pipeline(&self) -> &Pipeline {
        &self.pipeline
    }

    pub fn classify_profile(&self, id: &str, profile: &PHProfile) -> Result<PatchDecision> {
        match &self.pipeline {
            Pipeline::Fast { exemplars, config } => classify_fast(profile, exemplars, config),
            Pipeline::Accurate(m) => m.decide(id, profile),
        }
    }

    pub fn classify_tile(&self, id: &str, tile: &Tile) -> Result<PatchDecision> {
        let profile = self.extractor.profile(tile)?;
        self.classify_profile(id, &profile)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TileDecision {
    pub tile_id: String,
    pub x: u32,
    pub y: u32,
    pub decision: PatchDecision,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileFailure {
    pub tile_id: String,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct SegmentOutcome {
    /// Sorted by tile id.
    pub decisions: Vec<TileDecision>,
    pub failures: Vec<TileFailure>,
}

impl SegmentOutcome {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Classifies every tile of the manifest on the current rayon pool. Tiles that
/// cannot be read or classified are reported in `failures` and skipped.
pub fn segment(manifest: &TileManifest, segmenter: &Segmenter) -> SegmentOutcome {
    let results: Vec<_> = manifest
        .entries()
        .par_iter()
        .map(|e| {
            load_tile(&e.path)
                .and_then(|tile| segmenter.classify_tile(&e.id, &tile))
                .map(|decision| TileDecision {
                    tile_id: e.id.clone(),
                    x: e.x,
                    y: e.y,
                    decision,
                })
                .map_err(|err| TileFailure {
                    tile_id: e.id.clone(),
                    message: err.to_string(),
                })
        })
        .collect();
    let mut out = SegmentOutcome::default();
    for r in results {
        match r {
            Ok(d) => out.decisions.push(d),
            Err(f) => out.failures.push(f),
        }
    }
    out.decisions.sort_by(|a, b| a.tile_id.cmp(&b.tile_id));
    out.failures.sort_by(|a, b| a.tile_id.cmp(&b.tile_id));
    out
}

#[derive(Debug, Serialize, Deserialize)]
struct DecisionRow {
    tile_id: String,
    x: u32,
    y: u32,
    label: Label,
    score_t: f64,
    score_n: f64,
    prob: Option<f64>,
}

/// CSV `tile_id,x,y,label,score_t,score_n,prob`.
pub fn write_decisions(path: impl AsRef<Path>, decisions: &[TileDecision]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    if decisions.is_empty() {
        w.write_record(["tile_id", "x", "y", "label", "score_t", "score_n", "prob"])
            .map_err(|e| Error::csv(path, e))?;
    }
    for d in decisions {
        w.serialize(DecisionRow {
            tile_id: d.tile_id.clone(),
            x: d.x,
            y: d.y,
            label: d.decision.label,
            score_t: d.decision.score_t,
            score_n: d.decision.score_n,
            prob: d.decision.prob,
        })
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_decisions(path: impl AsRef<Path>) -> Result<Vec<TileDecision>> {
    let path = path.as_ref();
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let headers = r.headers().map_err(|e| Error::csv(path, e))?;
    if headers != vec!["tile_id", "x", "y", "label", "score_t", "score_n", "prob"] {
        return Err(Error::parse(
            path,
            1,
            "expected header `tile_id,x,y,label,score_t,score_n,prob`",
        ));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let row: DecisionRow = rec
            .deserialize(None)
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
        out.push(TileDecision {
            tile_id: row.tile_id,
            x: row.x,
            y: row.y,
            decision: PatchDecision {
                label: row.label,
                score_t: row.score_t,
                score_n: row.score_n,
                prob: row.prob,
            },
        });
    }
    Ok(out)
}
