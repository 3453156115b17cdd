//! Persistent homology profiles of grayscale patches.
//!
//! A patch is binarized at every threshold of a [`Filtration`]; the sublevel
//! sets `{I < t}` are nested, and for each of them we record β0 (8-connected
//! foreground components) and β1 (holes: 4-connected complement components).
//! The two Betti curves, normalized to probability distributions, form the
//! [`PHProfile`] of the patch.

mod components;
mod extract;
mod incremental;
mod union_find;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use components::{ComponentCount, Connectivity};
pub use extract::ProfileExtractor;
pub use incremental::{betti_curves, PixelOrder};

use crate::divergence::Distribution;
use crate::error::{Error, Result};
use crate::imaging::GrayImage;

/// Added to every Betti count before normalization so profiles are strictly positive.
pub const SMOOTHING_EPSILON: f64 = 1e-4;

/// Strictly increasing thresholds `t_1 < … < t_{k−1}` in `1..=255`; `t_0 = 0`
/// and `t_k = 256` are implicit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u16>", into = "Vec<u16>")]
pub struct Filtration {
    thresholds: Vec<u16>,
}

impl Filtration {
    pub fn new(thresholds: Vec<u16>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::Config(
                "filtration needs at least one threshold".into(),
            ));
        }
        if let Some(&t) = thresholds.iter().find(|&&t| !(1..=255).contains(&t)) {
            return Err(Error::Config(format!("threshold {t} outside 1..=255")));
        }
        if let Some(w) = thresholds.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "thresholds must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { thresholds })
    }

    /// `{16, 32, …, 240}`: fifteen thresholds, `k = 16`.
    pub fn uniform_default() -> Self {
        Self {
            thresholds: (1..=15).map(|i| i * 16).collect(),
        }
    }

    pub fn thresholds(&self) -> &[u16] {
        &self.thresholds
    }

    /// Number of intervals `k`; there are `k − 1` thresholds.
    pub fn k(&self) -> usize {
        self.thresholds.len() + 1
    }

    /// Length `2k − 2` of the concatenated profile.
    pub fn feature_len(&self) -> usize {
        2 * self.k() - 2
    }
}

impl Default for Filtration {
    fn default() -> Self {
        Self::uniform_default()
    }
}

impl TryFrom<Vec<u16>> for Filtration {
    type Error = Error;

    fn try_from(v: Vec<u16>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Filtration> for Vec<u16> {
    fn from(f: Filtration) -> Self {
        f.thresholds
    }
}

/// How β1 is read from the complement of a sublevel set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Beta1Mode {
    /// Complement components that do not touch the image border.
    #[default]
    BoundedVoids,
    /// Every complement component, including the exterior.
    LiteralComplement,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::Data(format!(
                "mask of {width}x{height} needs {} bits, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let bits = (0..width * height)
            .map(|i| f(i % width, i / width))
            .collect();
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// `self ⊆ other`, pixel by pixel.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }
}

/// Pixels with intensity strictly below `t` (`0 ≤ t ≤ 256`).
pub fn sublevel_mask(img: &GrayImage, t: u16) -> BinaryMask {
    BinaryMask {
        width: img.width(),
        height: img.height(),
        bits: img.as_raw().iter().map(|&v| u16::from(v) < t).collect(),
    }
}

/// Number of 8-connected foreground components.
pub fn betti0(mask: &BinaryMask) -> usize {
    components::count_components(
        mask.width,
        mask.height,
        |i| mask.bits[i],
        Connectivity::Eight,
    )
    .total
}

/// Number of 4-connected components of the complement; in the default mode
/// only those not touching the image border.
pub fn betti1(mask: &BinaryMask, mode: Beta1Mode) -> usize {
    let c = components::count_components(
        mask.width,
        mask.height,
        |i| !mask.bits[i],
        Connectivity::Four,
    );
    match mode {
        Beta1Mode::BoundedVoids => c.total - c.touching_border,
        Beta1Mode::LiteralComplement => c.total,
    }
}

/// β0 and β1 at each threshold of a filtration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiCurves {
    pub beta0: Vec<u32>,
    pub beta1: Vec<u32>,
}

/// Smoothed, normalized Betti curves of one patch.
#[derive(Debug, Clone, PartialEq)]
pub struct PHProfile {
    filtration: Filtration,
    curves: BettiCurves,
    p0: Distribution,
    p1: Distribution,
}

fn normalize_curve(curve: &[u32]) -> Distribution {
    let smoothed: Vec<f64> = curve
        .iter()
        .map(|&b| f64::from(b) + SMOOTHING_EPSILON)
        .collect();
    let total: f64 = smoothed.iter().sum();
    Distribution::new(smoothed.into_iter().map(|v| v / total).collect())
        .expect("smoothed counts normalize to a valid distribution")
}

impl PHProfile {
    pub fn from_curves(filtration: Filtration, curves: BettiCurves) -> Result<Self> {
        let n = filtration.thresholds().len();
        if curves.beta0.len() != n || curves.beta1.len() != n {
            return Err(Error::Contract(format!(
                "Betti curves of length {}/{} for {n} thresholds",
                curves.beta0.len(),
                curves.beta1.len()
            )));
        }
        let p0 = normalize_curve(&curves.beta0);
        let p1 = normalize_curve(&curves.beta1);
        Ok(Self {
            filtration,
            curves,
            p0,
            p1,
        })
    }

    pub fn filtration(&self) -> &Filtration {
        &self.filtration
    }

    pub fn curves(&self) -> &BettiCurves {
        &self.curves
    }

    pub fn p0(&self) -> &Distribution {
        &self.p0
    }

    pub fn p1(&self) -> &Distribution {
        &self.p1
    }

    /// `p0 ‖ p1`, length `2k − 2`.
    pub fn feature_vector(&self) -> Vec<f64> {
        let mut v = self.p0.as_slice().to_vec();
        v.extend_from_slice(self.p1.as_slice());
        v
    }

    /// One `[t, beta0, beta1, p0, p1]` row per threshold.
    pub fn to_rows(&self) -> Vec<ProfileRow> {
        self.filtration
            .thresholds()
            .iter()
            .enumerate()
            .map(|(i, &t)| ProfileRow {
                t,
                beta0: self.curves.beta0[i],
                beta1: self.curves.beta1[i],
                p0: self.p0.as_slice()[i],
                p1: self.p1.as_slice()[i],
            })
            .collect()
    }

    pub fn from_rows(rows: &[ProfileRow]) -> Result<Self> {
        let filtration = Filtration::new(rows.iter().map(|r| r.t).collect())?;
        let curves = BettiCurves {
            beta0: rows.iter().map(|r| r.beta0).collect(),
            beta1: rows.iter().map(|r| r.beta1).collect(),
        };
        let p0 = Distribution::new(rows.iter().map(|r| r.p0).collect())?;
        let p1 = Distribution::new(rows.iter().map(|r| r.p1).collect())?;
        Ok(Self {
            filtration,
            curves,
            p0,
            p1,
        })
    }

    /// CSV with header `t,beta0,beta1,p0,p1`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        for row in self.to_rows() {
            w.serialize(row).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::csv(path, e))?;
        let headers = r.headers().map_err(|e| Error::csv(path, e))?;
        if headers != vec!["t", "beta0", "beta1", "p0", "p1"] {
            return Err(Error::parse(
                path,
                1,
                "expected header `t,beta0,beta1,p0,p1`",
            ));
        }
        let rows = r
            .deserialize()
            .collect::<std::result::Result<Vec<ProfileRow>, _>>()
            .map_err(|e| Error::csv(path, e))?;
        Self::from_rows(&rows).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
    }
}

/// One threshold's entry of a serialized profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub t: u16,
    pub beta0: u32,
    pub beta1: u32,
    pub p0: f64,
    pub p1: f64,
}

/// Persistent homology profile of a grayscale image.
pub fn php(img: &GrayImage, filtration: &Filtration) -> PHProfile {
    php_with_mode(img, filtration, Beta1Mode::default())
}

pub fn php_with_mode(img: &GrayImage, filtration: &Filtration, mode: Beta1Mode) -> PHProfile {
    let order = PixelOrder::new(img);
    let curves = betti_curves(&order, filtration, mode);
    PHProfile::from_curves(filtration.clone(), curves).expect("curves match filtration")
}
