use serde::{Deserialize, Serialize};

use crate::divergence::php_distance;
use crate::error::{Error, Result};
use crate::exemplars::ExemplarSet;
use crate::homology::PHProfile;
use crate::label::Label;

fn default_c() -> f64 {
    0.2
}

fn default_k() -> usize {
    11
}

/// Parameters of the exemplar-divergence classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FastConfig {
    /// Similarity constant in `e^(−d·c)`.
    #[serde(default = "default_c")]
    pub c: f64,
    /// Number of nearest exemplars that vote.
    #[serde(default = "default_k")]
    pub k: usize,
}

impl Default for FastConfig {
    fn default() -> Self {
        Self {
            c: default_c(),
            k: default_k(),
        }
    }
}

impl FastConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!(
                "similarity constant c must be positive, got {}",
                self.c
            )));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome for one patch. For the fast pipeline the scores are the tumor- and
/// normal-side similarity sums; for the accurate pipeline they are the two
/// forest outputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatchDecision {
    pub label: Label,
    pub score_t: f64,
    pub score_n: f64,
    pub prob: Option<f64>,
}

/// Votes over the `k` exemplars nearest overall: each contributes `e^(−d·c)`
/// to its class. Tumor wins only on a strictly larger sum.
pub fn classify_distances(
    tumor: &[f64],
    normal: &[f64],
    cfg: &FastConfig,
) -> Result<PatchDecision> {
    cfg.validate()?;
    if tumor.is_empty() || normal.is_empty() {
        return Err(Error::Data(
            "both exemplar classes must be non-empty".into(),
        ));
    }
    if cfg.k > tumor.len() + normal.len() {
        return Err(Error::Config(format!(
            "k = {} exceeds the {} available exemplars",
            cfg.k,
            tumor.len() + normal.len()
        )));
    }
    let mut all: Vec<(f64, Label)> = tumor
        .iter()
        .map(|&d| (d, Label::Tumor))
        .chain(normal.iter().map(|&d| (d, Label::Normal)))
        .collect();
    // equal distances: normal first
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let (mut score_t, mut score_n) = (0.0, 0.0);
    for &(d, label) in &all[..cfg.k] {
        let s = (-d * cfg.c).exp();
        match label {
            Label::Tumor => score_t += s,
            Label::Normal => score_n += s,
        }
    }
    let total = score_t + score_n;
    Ok(PatchDecision {
        label: Label::from_class(score_t > score_n),
        score_t,
        score_n,
        prob: Some(if total > 0.0 { score_t / total } else { 0.5 }),
    })
}

/// Distances from `profile` to every (tumor, normal) exemplar.
pub fn exemplar_distances(profile: &PHProfile, ex: &ExemplarSet) -> Result<(Vec<f64>, Vec<f64>)> {
    let side = |label| {
        ex.class(label)
            .iter()
            .map(|e| php_distance(profile, &e.profile))
            .collect::<Result<Vec<_>>>()
    };
    Ok((side(Label::Tumor)?, side(Label::Normal)?))
}

pub fn classify_fast(
    profile: &PHProfile,
    ex: &ExemplarSet,
    cfg: &FastConfig,
) -> Result<PatchDecision> {
    if profile.filtration() != ex.filtration() {
        return Err(Error::Contract(
            "patch profile and exemplars use different filtrations".into(),
        ));
    }
    let (t, n) = exemplar_distances(profile, ex)?;
    classify_distances(&t, &n, cfg)
}

pub const CRITICAL_LOW: f64 = 0.49;
pub const CRITICAL_HIGH: f64 = 0.51;

/// Combines the profile-forest output `o1` with the external-feature-forest
/// output `o2`: the average decides unless it falls in the critical band
/// `[0.49, 0.51]`, where `o1` is rounded half-up.
pub fn ensemble_predict(o1: f64, o2: f64) -> Result<Label> {
    for (name, v) in [("o1", o1), ("o2", o2)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Contract(format!("{name} = {v} outside [0, 1]")));
        }
    }
    let avg = (o1 + o2) / 2.0;
    Ok(if avg < CRITICAL_LOW {
        Label::Normal
    } else if avg > CRITICAL_HIGH {
        Label::Tumor
    } else {
        Label::from_class(o1 >= 0.5)
    })
}
