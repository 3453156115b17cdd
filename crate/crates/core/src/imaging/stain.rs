use std::path::Path;
use std::sync::OnceLock;

use nalgebra::{Matrix3, RowVector3};
use serde::{Deserialize, Serialize};

use super::raster::{GrayImage, RgbPatch};
use crate::error::{Error, Result};

/// Hematoxylin concentration that maps to intensity 0.
pub const DEFAULT_C_MAX: f64 = 2.0;

const RUIFROK_H: [f64; 3] = [0.650, 0.704, 0.286];
const RUIFROK_E: [f64; 3] = [0.072, 0.990, 0.105];

/// Stain basis in optical-density space: rows are the hematoxylin, eosin and
/// residual unit vectors, so `OD = c · M` for a concentration row vector `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct StainMatrix {
    rows: Matrix3<f64>,
    inverse: Matrix3<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StainJson {
    h: [f64; 3],
    e: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<[f64; 3]>,
}

fn normalize(v: [f64; 3], name: &str) -> Result<RowVector3<f64>> {
    let v = RowVector3::from(v);
    let norm = v.norm();
    if !norm.is_finite() || norm <= f64::EPSILON {
        return Err(Error::Config(format!(
            "stain vector {name} has zero length"
        )));
    }
    Ok(v / norm)
}

impl StainMatrix {
    /// Builds a basis from hematoxylin and eosin vectors; a missing residual is
    /// the normalized cross product `h × e`. All rows are re-normalized.
    pub fn from_vectors(h: [f64; 3], e: [f64; 3], r: Option<[f64; 3]>) -> Result<Self> {
        let h = normalize(h, "h")?;
        let e = normalize(e, "e")?;
        let r = match r {
            Some(r) => normalize(r, "r")?,
            None => {
                let c = h.cross(&e);
                normalize([c[0], c[1], c[2]], "h × e")?
            }
        };
        let rows = Matrix3::from_rows(&[h, e, r]);
        let inverse = rows
            .try_inverse()
            .ok_or_else(|| Error::Config("stain matrix is singular".into()))?;
        let cond = rows.norm() * inverse.norm();
        if !cond.is_finite() || cond > 1e12 {
            return Err(Error::Config(format!(
                "stain matrix is ill-conditioned (condition number {cond:.3e})"
            )));
        }
        Ok(Self { rows, inverse })
    }

    /// The standard Ruifrok–Johnston H&E basis.
    pub fn ruifrok_johnston() -> Self {
        Self::from_vectors(RUIFROK_H, RUIFROK_E, None).expect("reference basis is invertible")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: StainJson = serde_json::from_str(s)
            .map_err(|e| Error::Config(format!("stain matrix JSON: {e}")))?;
        Self::from_vectors(raw.h, raw.e, raw.r)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&s).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json_string(&self) -> String {
        let row = |i: usize| [self.rows[(i, 0)], self.rows[(i, 1)], self.rows[(i, 2)]];
        serde_json::to_string_pretty(&StainJson {
            h: row(0),
            e: row(1),
            r: Some(row(2)),
        })
        .expect("plain floats serialize")
    }

    pub fn row(&self, i: usize) -> [f64; 3] {
        [self.rows[(i, 0)], self.rows[(i, 1)], self.rows[(i, 2)]]
    }

    /// Concentrations (hema, eosin, residual) for one OD row vector, unclamped.
    pub fn unmix(&self, od: [f64; 3]) -> [f64; 3] {
        let c = RowVector3::from(od) * self.inverse;
        [c[0], c[1], c[2]]
    }

    /// OD row vector produced by the given concentrations.
    pub fn mix(&self, conc: [f64; 3]) -> [f64; 3] {
        let od = RowVector3::from(conc) * self.rows;
        [od[0], od[1], od[2]]
    }

    fn hema_column(&self) -> [f64; 3] {
        [
            self.inverse[(0, 0)],
            self.inverse[(1, 0)],
            self.inverse[(2, 0)],
        ]
    }
}

impl Default for StainMatrix {
    fn default() -> Self {
        Self::ruifrok_johnston()
    }
}

/// `-log10(max(I, 1) / 255)` for every 8-bit intensity.
fn od_table() -> &'static [f64; 256] {
    static TABLE: OnceLock<[f64; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; 256];
        for (i, v) in t.iter_mut().enumerate() {
            *v = -((i.max(1) as f64) / 255.0).log10();
        }
        t
    })
}

/// Per-pixel stain concentrations, each clamped to be non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct StainPlanes {
    pub width: usize,
    pub height: usize,
    pub hema: Vec<f64>,
    pub eosin: Vec<f64>,
    pub residual: Vec<f64>,
}

pub fn stain_deconvolve(patch: &RgbPatch, m: &StainMatrix) -> StainPlanes {
    let od = od_table();
    let n = patch.len();
    let (r, g, b) = patch.planes();
    let mut out = StainPlanes {
        width: patch.width(),
        height: patch.height(),
        hema: Vec::with_capacity(n),
        eosin: Vec::with_capacity(n),
        residual: Vec::with_capacity(n),
    };
    for i in 0..n {
        let c = m.unmix([od[r[i] as usize], od[g[i] as usize], od[b[i] as usize]]);
        out.hema.push(c[0].max(0.0));
        out.eosin.push(c[1].max(0.0));
        out.residual.push(c[2].max(0.0));
    }
    out
}

/// Maps a hematoxylin concentration to an inverted 8-bit intensity:
/// 0 concentration is 255, `c_max` and above is 0.
#[inline]
pub(crate) fn hema_to_intensity(c: f64, c_max: f64) -> u8 {
    let c = c.clamp(0.0, c_max);
    (255.0 * (1.0 - c / c_max)).round() as u8
}

/// Hematoxylin channel as an inverted grayscale image (dense nuclei are dark),
/// so that sublevel sets grow onto nuclei first.
pub fn hematoxylin_channel(patch: &RgbPatch, m: &StainMatrix, c_max: f64) -> Result<GrayImage> {
    if !(c_max > 0.0 && c_max.is_finite()) {
        return Err(Error::Config(format!(
            "c_max must be positive, got {c_max}"
        )));
    }
    let od = od_table();
    let col = m.hema_column();
    let (r, g, b) = patch.planes();
    let data = r
        .iter()
        .zip(g)
        .zip(b)
        .map(|((&r, &g), &b)| {
            let c = od[r as usize] * col[0] + od[g as usize] * col[1] + od[b as usize] * col[2];
            hema_to_intensity(c, c_max)
        })
        .collect();
    GrayImage::new(patch.width(), patch.height(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_pixel(rgb: [u8; 3]) -> RgbPatch {
        RgbPatch::filled(1, 1, rgb).unwrap()
    }

    #[test]
    fn reference_rows_are_unit_vectors() {
        let m = StainMatrix::ruifrok_johnston();
        for i in 0..3 {
            let r = m.row(i);
            let norm = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
            assert!((norm - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn white_is_zero_concentration() {
        let planes = stain_deconvolve(&one_pixel([255, 255, 255]), &StainMatrix::default());
        assert_eq!(
            (planes.hema[0], planes.eosin[0], planes.residual[0]),
            (0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn black_is_finite() {
        let planes = stain_deconvolve(&one_pixel([0, 0, 0]), &StainMatrix::default());
        for v in [planes.hema[0], planes.eosin[0], planes.residual[0]] {
            assert!(v.is_finite() && v >= 0.0);
        }
    }

    #[test]
    fn pure_hematoxylin_pixel_unmixes_to_unit_hema() {
        let m = StainMatrix::default();
        let h = m.row(0);
        let px = h.map(|hc| (255.0 * 10f64.powf(-hc)).round() as u8);
        let planes = stain_deconvolve(&one_pixel(px), &m);
        assert!(
            (planes.hema[0] - 1.0).abs() <= 0.02,
            "hema {}",
            planes.hema[0]
        );
        assert!(planes.eosin[0] <= 0.02);
        assert!(planes.residual[0] <= 0.02);
    }

    #[test]
    fn singular_matrix_rejected() {
        let err =
            StainMatrix::from_vectors([1.0, 0.0, 0.0], [2.0, 0.0, 0.0], Some([0.0, 1.0, 0.0]));
        assert!(matches!(err, Err(Error::Config(_))));
        // h parallel to e makes the cross-product residual degenerate
        assert!(StainMatrix::from_vectors([1.0, 1.0, 0.0], [2.0, 2.0, 0.0], None).is_err());
    }

    #[test]
    fn json_residual_optional() {
        let a = StainMatrix::from_json_str(r#"{"h":[0.65,0.704,0.286],"e":[0.072,0.99,0.105]}"#)
            .unwrap();
        assert_eq!(a, StainMatrix::ruifrok_johnston());
        let b = StainMatrix::from_json_str(&a.to_json_string()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((a.row(i)[j] - b.row(i)[j]).abs() < 1e-12);
            }
        }
        assert!(StainMatrix::from_json_str(r#"{"h":[1,0,0],"e":[0,1,0],"x":1}"#).is_err());
    }

    #[test]
    fn intensity_scale_endpoints() {
        assert_eq!(hema_to_intensity(0.0, 2.0), 255);
        assert_eq!(hema_to_intensity(2.0, 2.0), 0);
        assert_eq!(hema_to_intensity(1.0, 2.0), 128);
        assert_eq!(hema_to_intensity(7.0, 2.0), 0);
    }

    #[test]
    fn white_patch_channel_is_bright() {
        let p = RgbPatch::filled(4, 3, [255, 255, 255]).unwrap();
        let g = hematoxylin_channel(&p, &StainMatrix::default(), DEFAULT_C_MAX).unwrap();
        assert!(g.as_raw().iter().all(|&v| v == 255));
    }

    #[test]
    fn round_trip_reconstructs_od() {
        let m = StainMatrix::default();
        // non-negative true concentrations
        for conc in [[0.5, 0.3, 0.0], [1.2, 0.1, 0.05], [0.0, 0.8, 0.0]] {
            let od = m.mix(conc);
            let px = od.map(|v| (255.0 * 10f64.powf(-v)).round() as u8);
            let planes = stain_deconvolve(&one_pixel(px), &m);
            let back = m.mix([planes.hema[0], planes.eosin[0], planes.residual[0]]);
            for c in 0..3 {
                assert!(
                    (back[c] - od[c]).abs() <= 0.02,
                    "{conc:?}: {back:?} vs {od:?}"
                );
            }
        }
    }
}
