//! Exemplar selection: scoring patches from activation maps, picking
//! representatives per class (IQR binning, k-means, random), and persisting
//! their profiles.

mod activation;
mod kmeans;
mod select;
mod set;

pub use activation::{
    activation_energy, flatten_activation, patch_score, ActivationMap, ActivationTensor,
};
pub use kmeans::{kmeans_exemplars, kmeans_select};
pub use select::{iqr_bin_select, random_exemplars, ScoreRow, ScoreTable};
pub use set::{build_exemplar_set, Exemplar, ExemplarSet, SelectionMethod, MANIFEST_FILE};
