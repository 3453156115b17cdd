use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"ACTV";

/// Activation maps of one patch, `W × H × Z`, stored z-fastest
/// (index `(h·W + w)·Z + z`).
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationTensor {
    width: usize,
    height: usize,
    depth: usize,
    values: Vec<f32>,
}

impl ActivationTensor {
    pub fn new(width: usize, height: usize, depth: usize, values: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 || depth == 0 {
            return Err(Error::Data(format!(
                "activation dimensions must be positive, got {width}x{height}x{depth}"
            )));
        }
        if values.len() != width * height * depth {
            return Err(Error::Data(format!(
                "activation tensor {width}x{height}x{depth} needs {} values, got {}",
                width * height * depth,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("activation values must be finite".into()));
        }
        Ok(Self {
            width,
            height,
            depth,
            values,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.width, self.height, self.depth)
    }

    pub fn get(&self, w: usize, h: usize, z: usize) -> f32 {
        self.values[(h * self.width + w) * self.depth + z]
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)
            .map_err(|e| Error::Data(format!("activation header: {e}")))?;
        if &header[..4] != MAGIC {
            return Err(Error::Data(
                "activation file does not start with `ACTV`".into(),
            ));
        }
        let dim = |i: usize| {
            u32::from_le_bytes(header[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as usize
        };
        let (w, h, z) = (dim(0), dim(1), dim(2));
        let n = w
            .checked_mul(h)
            .and_then(|v| v.checked_mul(z))
            .ok_or_else(|| Error::Data("activation dimensions overflow".into()))?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)
            .map_err(|e| Error::Data(format!("activation payload: {e}")))?;
        if bytes.len() != n * 4 {
            return Err(Error::Data(format!(
                "activation payload holds {} bytes, expected {}",
                bytes.len(),
                n * 4
            )));
        }
        let values = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(w, h, z, values)
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        for d in [self.width, self.height, self.depth] {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(std::io::BufReader::new(f))
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// A flattened `W × H` map, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

/// `F(w,h) = Σ_z α(w,h,z)²`, min–max normalized to `[0, 1]`. A constant map
/// becomes all zeros.
pub fn flatten_activation(t: &ActivationTensor) -> ActivationMap {
    let mut values: Vec<f64> = t
        .values
        .chunks_exact(t.depth)
        .map(|col| col.iter().map(|&a| f64::from(a) * f64::from(a)).sum())
        .collect();
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = hi - lo;
    for v in &mut values {
        *v = if range > 0.0 { (*v - lo) / range } else { 0.0 };
    }
    ActivationMap {
        width: t.width,
        height: t.height,
        values,
    }
}

/// Unnormalized `Σ_z α²` per position, for inspection.
pub fn activation_energy(t: &ActivationTensor) -> Vec<f64> {
    t.values
        .chunks_exact(t.depth)
        .map(|col| col.iter().map(|&a| f64::from(a) * f64::from(a)).sum())
        .collect()
}

/// Lower median of the map's values.
pub fn patch_score(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Data("cannot score an empty map".into()));
    }
    let mut v = values.to_vec();
    let mid = (v.len() - 1) / 2;
    let (_, m, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    Ok(*m)
}
