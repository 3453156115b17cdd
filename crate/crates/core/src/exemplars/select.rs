use std::collections::HashSet;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub patch_id: String,
    pub label: Label,
    pub score: f64,
}

/// Per-patch scalar scores with class labels; ids are unique.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreTable {
    rows: Vec<ScoreRow>,
}

impl ScoreTable {
    pub fn new(rows: Vec<ScoreRow>) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &rows {
            if !seen.insert(r.patch_id.as_str()) {
                return Err(Error::Data(format!("duplicate patch id {:?}", r.patch_id)));
            }
            if !r.score.is_finite() {
                return Err(Error::Data(format!(
                    "non-finite score for {:?}",
                    r.patch_id
                )));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[ScoreRow] {
        &self.rows
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::csv(path, e))?;
        let headers = r.headers().map_err(|e| Error::csv(path, e))?;
        if headers != vec!["patch_id", "label", "score"] {
            return Err(Error::parse(
                path,
                1,
                "expected header `patch_id,label,score`",
            ));
        }
        let mut rows: Vec<ScoreRow> = Vec::new();
        let mut seen = HashSet::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::csv(path, e))?;
            let line = rec.position().map_or(0, |p| p.line());
            let row: ScoreRow = rec
                .deserialize(None)
                .map_err(|e| Error::parse(path, line, e.to_string()))?;
            if !row.score.is_finite() {
                return Err(Error::parse(path, line, "score must be finite"));
            }
            if !seen.insert(row.patch_id.clone()) {
                return Err(Error::parse(
                    path,
                    line,
                    format!("duplicate patch_id {:?}", row.patch_id),
                ));
            }
            rows.push(row);
        }
        Ok(Self { rows })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Type-7 (linear interpolation) quantile of sorted data.
pub(crate) fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Splits the class's interquartile range into `q` equal bins and picks, per
/// bin, the patch whose score is nearest the bin center. Ties go to the
/// earlier row; a patch already taken is replaced by the next nearest.
pub fn iqr_bin_select(scores: &ScoreTable, class: Label, q: usize) -> Result<Vec<String>> {
    if q == 0 {
        return Err(Error::Config(
            "number of exemplars per class must be at least 1".into(),
        ));
    }
    let members: Vec<&ScoreRow> = scores.rows.iter().filter(|r| r.label == class).collect();
    if members.len() < q {
        return Err(Error::Data(format!(
            "class {class} has {} scored patches, fewer than the {q} exemplars requested",
            members.len()
        )));
    }
    let mut sorted: Vec<f64> = members.iter().map(|r| r.score).collect();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_type7(&sorted, 0.25);
    let q3 = quantile_type7(&sorted, 0.75);
    let width = (q3 - q1) / q as f64;

    let mut taken = vec![false; members.len()];
    let mut out = Vec::with_capacity(q);
    for b in 0..q {
        let center = q1 + (b as f64 + 0.5) * width;
        let best = members
            .iter()
            .enumerate()
            .filter(|(i, _)| !taken[*i])
            .min_by(|(i, a), (j, c)| {
                (a.score - center)
                    .abs()
                    .total_cmp(&(c.score - center).abs())
                    .then(i.cmp(j))
            })
            .map(|(i, _)| i)
            .expect("fewer selections than members");
        taken[best] = true;
        out.push(members[best].patch_id.clone());
    }
    Ok(out)
}

/// Uniform sample of `q` ids without replacement, reproducible per seed.
pub fn random_exemplars(ids: &[String], q: usize, seed: u64) -> Result<Vec<String>> {
    if q == 0 {
        return Err(Error::Config(
            "number of exemplars must be at least 1".into(),
        ));
    }
    if q > ids.len() {
        return Err(Error::Data(format!(
            "cannot draw {q} exemplars from {} patches",
            ids.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, ids.len(), q)
        .into_iter()
        .map(|i| ids[i].clone())
        .collect())
}
