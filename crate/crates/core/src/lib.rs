//! Tumor/non-tumor classification of histology patches from persistent
//! homology profiles (PHPs).
//!
//! The hematoxylin channel of each patch is thresholded at a fixed sequence of
//! intensities; β0 and β1 of every sublevel set are counted with a union-find
//! sweep and normalized into two distributions. Two classifiers consume them:
//!
//! * a fast one that compares a patch's profile to labeled exemplar profiles
//!   with the symmetric KL divergence and votes over the nearest exemplars
//!   ([`segmenter::classify_fast`]);
//! * an accurate one that averages two regression forests, one on profiles and
//!   one on externally supplied feature vectors ([`segmenter::ensemble_predict`]).

pub mod divergence;
pub mod error;
pub mod exemplars;
pub mod forest;
pub mod homology;
pub mod imaging;
pub mod label;
pub mod metrics;
pub mod segmenter;
pub mod synth;

pub use divergence::{kl, php_distance, sym_kl, Distribution};
pub use error::{Error, Result};
pub use exemplars::{ExemplarSet, SelectionMethod};
pub use forest::{FeatureTable, ForestConfig, RegressionForest};
pub use homology::{
    betti0, betti1, php, php_with_mode, sublevel_mask, Beta1Mode, BettiCurves, BinaryMask,
    Filtration, PHProfile, ProfileExtractor,
};
pub use imaging::{
    hematoxylin_channel, load_tile, stain_deconvolve, tile_image, tile_offsets, GrayImage,
    RgbPatch, StainMatrix, Tile, TileEntry, TileManifest,
};
pub use label::Label;
pub use metrics::{Confusion, MetricsReport};
pub use segmenter::{FastConfig, PatchDecision, Pipeline, Segmenter};
