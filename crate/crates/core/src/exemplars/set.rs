use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homology::{Filtration, PHProfile, ProfileExtractor, ProfileRow};
use crate::imaging::{load_tile, TileManifest};
use crate::label::Label;

/// How exemplar patches were chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMethod {
    /// IQR binning of per-patch scores.
    Scores,
    Kmeans,
    Random,
    /// Ids supplied directly.
    Manual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exemplar {
    pub id: String,
    pub profile: PHProfile,
}

/// Labeled reference profiles for the fast classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ExemplarSet {
    method: SelectionMethod,
    seed: Option<u64>,
    filtration: Filtration,
    tumor: Vec<Exemplar>,
    normal: Vec<Exemplar>,
}

type RowTuple = (u16, u32, u32, f64, f64);

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExemplarJson {
    id: String,
    php: Vec<RowTuple>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestJson {
    method: SelectionMethod,
    seed: Option<u64>,
    filtration: Filtration,
    tumor: Vec<ExemplarJson>,
    normal: Vec<ExemplarJson>,
}

pub const MANIFEST_FILE: &str = "exemplars.json";

impl ExemplarSet {
    pub fn new(
        method: SelectionMethod,
        seed: Option<u64>,
        filtration: Filtration,
        tumor: Vec<Exemplar>,
        normal: Vec<Exemplar>,
    ) -> Result<Self> {
        for (name, list) in [("tumor", &tumor), ("normal", &normal)] {
            if list.is_empty() {
                return Err(Error::Data(format!("exemplar set has no {name} exemplars")));
            }
            if let Some(e) = list.iter().find(|e| e.profile.filtration() != &filtration) {
                return Err(Error::Data(format!(
                    "exemplar {:?} was computed on a different filtration",
                    e.id
                )));
            }
        }
        Ok(Self {
            method,
            seed,
            filtration,
            tumor,
            normal,
        })
    }

    pub fn method(&self) -> SelectionMethod {
        self.method
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filtration
    }

    pub fn tumor(&self) -> &[Exemplar] {
        &self.tumor
    }

    pub fn normal(&self) -> &[Exemplar] {
        &self.normal
    }

    pub fn class(&self, label: Label) -> &[Exemplar] {
        match label {
            Label::Tumor => &self.tumor,
            Label::Normal => &self.normal,
        }
    }

    pub fn len(&self) -> usize {
        self.tumor.len() + self.normal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_json_string(&self) -> String {
        let conv = |list: &[Exemplar]| {
            list.iter()
                .map(|e| ExemplarJson {
                    id: e.id.clone(),
                    php: e
                        .profile
                        .to_rows()
                        .into_iter()
                        .map(|r| (r.t, r.beta0, r.beta1, r.p0, r.p1))
                        .collect(),
                })
                .collect()
        };
        serde_json::to_string_pretty(&ManifestJson {
            method: self.method,
            seed: self.seed,
            filtration: self.filtration.clone(),
            tumor: conv(&self.tumor),
            normal: conv(&self.normal),
        })
        .expect("exemplar manifest serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: ManifestJson =
            serde_json::from_str(s).map_err(|e| Error::Data(format!("exemplar manifest: {e}")))?;
        let conv = |list: Vec<ExemplarJson>| -> Result<Vec<Exemplar>> {
            list.into_iter()
                .map(|e| {
                    let rows: Vec<ProfileRow> = e
                        .php
                        .into_iter()
                        .map(|(t, beta0, beta1, p0, p1)| ProfileRow {
                            t,
                            beta0,
                            beta1,
                            p0,
                            p1,
                        })
                        .collect();
                    let profile = PHProfile::from_rows(&rows)
                        .map_err(|err| Error::Data(format!("exemplar {:?}: {err}", e.id)))?;
                    Ok(Exemplar { id: e.id, profile })
                })
                .collect()
        };
        Self::new(
            raw.method,
            raw.seed,
            raw.filtration,
            conv(raw.tumor)?,
            conv(raw.normal)?,
        )
    }

    /// Writes `exemplars.json` plus one profile CSV per exemplar under
    /// `profiles/`. Returns the manifest path.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let dir = dir.as_ref();
        let profiles = dir.join("profiles");
        std::fs::create_dir_all(&profiles).map_err(|e| Error::io(&profiles, e))?;
        for (label, list) in [(Label::Tumor, &self.tumor), (Label::Normal, &self.normal)] {
            for e in list {
                e.profile
                    .write_csv(profiles.join(format!("{label}_{}.csv", e.id)))?;
            }
        }
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, self.to_json_string()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Loads a manifest file, or `exemplars.json` inside a directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut path = path.as_ref().to_path_buf();
        if path.is_dir() {
            path = path.join(MANIFEST_FILE);
        }
        let s = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Self::from_json_str(&s).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
    }
}

fn profiles_for(
    manifest: &TileManifest,
    ids: &[String],
    extractor: &ProfileExtractor,
) -> Result<Vec<Exemplar>> {
    let entries = ids
        .iter()
        .map(|id| {
            manifest
                .get(id)
                .ok_or_else(|| Error::Data(format!("exemplar id {id:?} is not in the manifest")))
        })
        .collect::<Result<Vec<_>>>()?;
    entries
        .par_iter()
        .map(|entry| {
            let tile = load_tile(&entry.path)
                .map_err(|e| Error::Data(format!("tile {:?}: {e}", entry.id)))?;
            Ok(Exemplar {
                id: entry.id.clone(),
                profile: extractor.profile(&tile)?,
            })
        })
        .collect()
}

/// Computes the profile of every selected tile and assembles the set.
pub fn build_exemplar_set(
    manifest: &TileManifest,
    tumor_ids: &[String],
    normal_ids: &[String],
    extractor: &ProfileExtractor,
    method: SelectionMethod,
    seed: Option<u64>,
) -> Result<ExemplarSet> {
    if tumor_ids.is_empty() || normal_ids.is_empty() {
        return Err(Error::Data(format!(
            "each class needs at least one exemplar (tumor: {}, normal: {})",
            tumor_ids.len(),
            normal_ids.len()
        )));
    }
    let tumor = profiles_for(manifest, tumor_ids, extractor)?;
    let normal = profiles_for(manifest, normal_ids, extractor)?;
    ExemplarSet::new(method, seed, extractor.filtration.clone(), tumor, normal)
}
