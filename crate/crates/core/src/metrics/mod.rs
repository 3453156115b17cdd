//! Patch-level evaluation and latency measurement.

mod bench;

pub use bench::{bench, bench_tiles, BenchReport, LatencyStats, StageBreakdown};

use std::collections::HashMap;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::TileManifest;
use crate::label::Label;
use crate::segmenter::TileDecision;

/// Confusion counts with tumor as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Label, Label)>) -> Self {
        let mut c = Self::default();
        for (truth, predicted) in pairs {
            c.add(truth, predicted);
        }
        c
    }

    pub fn add(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Tumor, Label::Tumor) => self.tp += 1,
            (Label::Normal, Label::Tumor) => self.fp += 1,
            (Label::Tumor, Label::Normal) => self.fn_ += 1,
            (Label::Normal, Label::Normal) => self.tn += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

fn ratio(num: u64, den: u64, what: &str) -> f64 {
    if den == 0 {
        warn!("{what} is undefined (zero denominator); reporting 0");
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall and their harmonic mean. Undefined values are reported as 0.
pub fn prf1(c: &Confusion) -> (f64, f64, f64) {
    let precision = ratio(c.tp, c.tp + c.fp, "precision");
    let recall = ratio(c.tp, c.tp + c.fn_, "recall");
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        warn!("F1 is undefined (precision and recall are both 0); reporting 0");
        0.0
    };
    (precision, recall, f1)
}

/// True negative rate `tn / (tn + fp)`.
pub fn specificity(c: &Confusion) -> f64 {
    ratio(c.tn, c.tn + c.fp, "specificity")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub specificity: f64,
    pub counts: Confusion,
}

impl MetricsReport {
    pub fn from_confusion(counts: Confusion) -> Self {
        let (precision, recall, f1) = prf1(&counts);
        Self {
            precision,
            recall,
            f1,
            specificity: specificity(&counts),
            counts,
        }
    }
}

/// Scores decisions against the labels of a truth manifest. Every decided
/// tile must have a ground-truth label.
pub fn evaluate(decisions: &[TileDecision], truth: &TileManifest) -> Result<MetricsReport> {
    let labels: HashMap<&str, Option<Label>> =
        truth.iter().map(|e| (e.id.as_str(), e.label)).collect();
    let mut c = Confusion::default();
    for d in decisions {
        match labels.get(d.tile_id.as_str()) {
            Some(Some(l)) => c.add(*l, d.decision.label),
            Some(None) => {
                return Err(Error::Data(format!(
                    "tile {:?} has no ground-truth label",
                    d.tile_id
                )))
            }
            None => {
                return Err(Error::Data(format!(
                    "tile {:?} is not in the truth manifest",
                    d.tile_id
                )))
            }
        }
    }
    Ok(MetricsReport::from_confusion(c))
}
