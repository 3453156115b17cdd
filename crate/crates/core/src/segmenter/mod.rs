//! Patch classifiers and whole-manifest segmentation.

mod classify;
mod map;
mod pipeline;

pub use classify::{
    classify_distances, classify_fast, ensemble_predict, exemplar_distances, FastConfig,
    PatchDecision, CRITICAL_HIGH, CRITICAL_LOW,
};
pub use map::{render_overlay, write_overlay, MapCell, ProbabilityMap};
pub use pipeline::{
    read_decisions, segment, write_decisions, AccurateModels, Pipeline, SegmentOutcome, Segmenter,
    TileDecision, TileFailure,
};
