//! Bagged regression forest: bootstrap samples, variance-reduction splits over
//! a random subset of features, leaves predicting the mean target.

mod features;
mod tree;

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use features::FeatureTable;
pub use tree::{Node, Tree};

use crate::error::{Error, Result};

fn default_n_trees() -> usize {
    200
}

fn default_min_leaf() -> usize {
    5
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestConfig {
    #[serde(default = "default_n_trees")]
    pub n_trees: usize,
    /// Features tried per split; `None` means `⌈p/3⌉`.
    #[serde(default)]
    pub mtry: Option<usize>,
    #[serde(default = "default_min_leaf")]
    pub min_leaf: usize,
    #[serde(default)]
    pub max_depth: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Fit each tree on a bootstrap sample. Disabling it fits every tree on
    /// the full training set.
    #[serde(default = "default_true")]
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: default_n_trees(),
            mtry: None,
            min_leaf: default_min_leaf(),
            max_depth: None,
            seed: 0,
            bootstrap: true,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("forest needs at least one tree".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::Config("min_leaf must be at least 1".into()));
        }
        if self.mtry == Some(0) {
            return Err(Error::Config("mtry must be at least 1".into()));
        }
        Ok(())
    }

    /// Features tried per split for `p` input features.
    pub fn mtry_for(&self, p: usize) -> Result<usize> {
        let m = self.mtry.unwrap_or_else(|| p.div_ceil(3));
        if m == 0 || m > p {
            return Err(Error::Config(format!("mtry {m} outside 1..={p}")));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionForest {
    n_features: usize,
    n_train: usize,
    config: ForestConfig,
    trees: Vec<Tree>,
}

impl RegressionForest {
    /// Fits the forest. Rows of `x` are samples; `y` are targets in `[0, 1]`.
    pub fn train(x: &[Vec<f64>], y: &[f64], config: &ForestConfig) -> Result<Self> {
        config.validate()?;
        let n = x.len();
        if n != y.len() {
            return Err(Error::Contract(format!(
                "{n} feature rows but {} targets",
                y.len()
            )));
        }
        if n < 2 {
            return Err(Error::Data(format!(
                "need at least 2 training rows, got {n}"
            )));
        }
        let p = x[0].len();
        if p == 0 {
            return Err(Error::Data("feature vectors are empty".into()));
        }
        if let Some(i) = x.iter().position(|r| r.len() != p) {
            return Err(Error::Data(format!(
                "row {i} has {} features, expected {p}",
                x[i].len()
            )));
        }
        if x.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Data("feature values must be finite".into()));
        }
        if let Some(v) = y.iter().find(|v| !v.is_finite()) {
            return Err(Error::Data(format!("target {v} is not finite")));
        }
        let mtry = config.mtry_for(p)?;

        let trees = (0..config.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                rng.set_stream(t as u64);
                let params = tree::Params {
                    mtry,
                    min_leaf: config.min_leaf,
                    max_depth: config.max_depth,
                };
                Tree::fit(x, y, config.bootstrap, &params, &mut rng)
            })
            .collect();
        Ok(Self {
            n_features: p,
            n_train: n,
            config: config.clone(),
            trees,
        })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// Mean tree output, clamped to `[0, 1]`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::Contract(format!(
                "forest expects {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        let first = self.trees[0].predict(x);
        let mut sum = first;
        let mut unanimous = true;
        for t in &self.trees[1..] {
            let v = t.predict(x);
            unanimous &= v == first;
            sum += v;
        }
        // agreeing trees return their common value without rounding drift
        let mean = if unanimous {
            first
        } else {
            sum / self.trees.len() as f64
        };
        Ok(mean.clamp(0.0, 1.0))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("forest serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let forest: Self = serde_json::from_str(&s).map_err(|e| Error::json(path, e))?;
        if forest.trees.is_empty() {
            return Err(Error::Data(format!(
                "{}: forest has no trees",
                path.display()
            )));
        }
        Ok(forest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn line_data(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()])
            .collect();
        let y = x.iter().map(|r| r[0]).collect();
        (x, y)
    }

    fn small(n_trees: usize) -> ForestConfig {
        ForestConfig {
            n_trees,
            ..ForestConfig::default()
        }
    }

    #[test]
    fn constant_target() {
        let (x, _) = line_data(40, 1);
        let y = vec![0.3; 40];
        let f = RegressionForest::train(&x, &y, &small(10)).unwrap();
        for r in &x {
            assert_eq!(f.predict(r).unwrap(), 0.3);
        }
    }

    #[test]
    fn huge_min_leaf_gives_stumps() {
        let (x, y) = line_data(30, 2);
        let cfg = ForestConfig {
            min_leaf: 30,
            ..small(15)
        };
        let f = RegressionForest::train(&x, &y, &cfg).unwrap();
        assert!(f
            .trees()
            .iter()
            .all(|t| matches!(t.root(), Node::Leaf { .. })));
        let (lo, hi) = y
            .iter()
            .fold((1.0f64, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        let pred = f.predict(&x[0]).unwrap();
        assert!(pred >= lo && pred <= hi);
    }

    #[test]
    fn single_leaf_without_bagging_is_training_mean() {
        let (x, y) = line_data(12, 3);
        let cfg = ForestConfig {
            min_leaf: 100,
            bootstrap: false,
            ..small(3)
        };
        let f = RegressionForest::train(&x, &y, &cfg).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!((f.predict(&x[5]).unwrap() - mean).abs() < 1e-12);
    }

    #[test]
    fn learns_identity_feature() {
        let (x, y) = line_data(200, 4);
        let (xt, yt) = line_data(200, 5);
        let f = RegressionForest::train(&x, &y, &small(50)).unwrap();
        let mean = yt.iter().sum::<f64>() / yt.len() as f64;
        let var = yt.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / yt.len() as f64;
        let mse = xt
            .iter()
            .zip(&yt)
            .map(|(r, v)| (f.predict(r).unwrap() - v).powi(2))
            .sum::<f64>()
            / yt.len() as f64;
        assert!(mse < 0.25 * var, "mse {mse} var {var}");
    }

    #[test]
    fn deterministic_per_seed() {
        let (x, y) = line_data(60, 6);
        let a = RegressionForest::train(&x, &y, &small(8)).unwrap();
        let b = RegressionForest::train(&x, &y, &small(8)).unwrap();
        assert_eq!(a.to_json_string(), b.to_json_string());
        let c = RegressionForest::train(
            &x,
            &y,
            &ForestConfig {
                seed: 1,
                ..small(8)
            },
        )
        .unwrap();
        assert_ne!(a.to_json_string(), c.to_json_string());
    }

    #[test]
    fn step_function_reproduced_exactly() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..20).map(|i| if i < 8 { 0.0 } else { 1.0 }).collect();
        let cfg = ForestConfig {
            n_trees: 1,
            min_leaf: 1,
            bootstrap: false,
            ..ForestConfig::default()
        };
        let f = RegressionForest::train(&x, &y, &cfg).unwrap();
        for (r, v) in x.iter().zip(&y) {
            assert_eq!(f.predict(r).unwrap(), *v);
        }
        match f.trees()[0].root() {
            Node::Split {
                feature, threshold, ..
            } => {
                assert_eq!((*feature, *threshold), (0, 7.5));
            }
            other => panic!("expected a split, got {other:?}"),
        }
    }

    #[test]
    fn out_of_bag_fraction() {
        let (x, y) = line_data(2000, 7);
        let f = RegressionForest::train(
            &x,
            &y,
            &ForestConfig {
                min_leaf: 400,
                ..small(20)
            },
        )
        .unwrap();
        let n = x.len() as f64;
        let mean_in_bag =
            f.trees().iter().map(|t| t.in_bag() as f64).sum::<f64>() / f.trees().len() as f64;
        let expect_in = n * (1.0 - (-1.0f64).exp());
        assert!((mean_in_bag - expect_in).abs() <= 0.05 * expect_in);
        let mean_oob = n - mean_in_bag;
        let expect_oob = n * (-1.0f64).exp();
        assert!((mean_oob - expect_oob).abs() <= 0.05 * expect_oob);
    }

    #[test]
    fn errors() {
        let (x, y) = line_data(10, 8);
        assert!(RegressionForest::train(&x[..1], &y[..1], &small(1)).is_err());
        assert!(RegressionForest::train(&x, &y[..9], &small(1)).is_err());
        assert!(RegressionForest::train(
            &x,
            &y,
            &ForestConfig {
                n_trees: 0,
                ..small(1)
            }
        )
        .is_err());
        assert!(RegressionForest::train(
            &x,
            &y,
            &ForestConfig {
                mtry: Some(4),
                ..small(1)
            }
        )
        .is_err());
        let f = RegressionForest::train(&x, &y, &small(2)).unwrap();
        assert!(matches!(f.predict(&[0.0]), Err(Error::Contract(_))));
    }

    #[test]
    fn constant_features_give_mean_stump() {
        let x = vec![vec![1.0, 1.0]; 20];
        let y: Vec<f64> = (0..20).map(|i| (i % 2) as f64).collect();
        let f = RegressionForest::train(
            &x,
            &y,
            &ForestConfig {
                bootstrap: false,
                ..small(2)
            },
        )
        .unwrap();
        assert_eq!(f.predict(&[1.0, 1.0]).unwrap(), 0.5);
    }

    #[test]
    fn json_round_trip() {
        let (x, y) = line_data(50, 9);
        let f = RegressionForest::train(&x, &y, &small(4)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.json");
        f.save(&p).unwrap();
        assert_eq!(RegressionForest::load(&p).unwrap(), f);
    }

    #[test]
    fn mtry_default_is_a_third() {
        let cfg = ForestConfig::default();
        assert_eq!(cfg.mtry_for(30).unwrap(), 10);
        assert_eq!(cfg.mtry_for(1024).unwrap(), 342);
        assert_eq!(cfg.mtry_for(1).unwrap(), 1);
    }
}
