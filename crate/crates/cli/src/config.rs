use std::path::{Path, PathBuf};

use anyhow::Context;
use phseg_core::{Beta1Mode, FastConfig, Filtration, ForestConfig, ProfileExtractor, StainMatrix};
use serde::{Deserialize, Serialize};

use crate::error::usage;

/// Run configuration, read from a JSON file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Strictly increasing thresholds in `1..=255`.
    pub filtration: Option<Filtration>,
    /// Stain basis JSON; relative paths resolve against the config file.
    pub stain_matrix: Option<PathBuf>,
    pub c_max: Option<f64>,
    pub fast: FastConfig,
    pub forest: ForestConfig,
    /// Seed for exemplar selection and synthetic data.
    pub seed: u64,
    /// Count every complement component as a hole, border-touching ones too.
    pub literal_complement: bool,
    pub workers: Option<usize>,
}

impl Config {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: Config = serde_json::from_str(&text)
            .map_err(|e| usage(format!("invalid config {}: {e}", path.display())))?;
        if let Some(p) = &cfg.stain_matrix {
            if p.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.stain_matrix = Some(base.join(p));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.fast.validate().map_err(|e| usage(e.to_string()))?;
        self.forest.validate().map_err(|e| usage(e.to_string()))?;
        if let Some(c) = self.c_max {
            if !(c > 0.0 && c.is_finite()) {
                return Err(usage(format!("c_max must be positive and finite, got {c}")));
            }
        }
        if self.workers == Some(0) {
            return Err(usage("workers must be at least 1"));
        }
        Ok(())
    }

    pub fn extractor(&self) -> anyhow::Result<ProfileExtractor> {
        let mut ex = ProfileExtractor::default();
        if let Some(f) = &self.filtration {
            ex.filtration = f.clone();
        }
        if let Some(p) = &self.stain_matrix {
            ex.stain = StainMatrix::load(p)
                .with_context(|| format!("loading stain matrix {}", p.display()))?;
        }
        if let Some(c) = self.c_max {
            ex.c_max = c;
        }
        if self.literal_complement {
            ex.beta1_mode = Beta1Mode::LiteralComplement;
        }
        Ok(ex)
    }
}
