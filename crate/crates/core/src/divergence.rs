//! Kullback–Leibler divergences between discrete distributions and the
//! scalar distance between two persistent homology profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homology::PHProfile;

/// Tolerance on `Σp = 1`.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Strictly positive probabilities summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::Data(
                "distribution must have at least one bin".into(),
            ));
        }
        if let Some(bad) = probabilities.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::Data(format!(
                "distribution entries must be finite and strictly positive, got {bad}"
            )));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Data(format!("distribution sums to {sum}, not 1")));
        }
        Ok(Self(probabilities))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Data(
                "distribution must have at least one bin".into(),
            ));
        }
        Self::new(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.0
    }
}

fn kl_unchecked(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(&pi, &qi)| pi * (pi / qi).ln()).sum()
}

/// `Σ p(i) ln(p(i)/q(i))`, in nats.
pub fn kl(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Contract(format!(
            "KL divergence of distributions with {} and {} bins",
            p.len(),
            q.len()
        )));
    }
    Ok(kl_unchecked(p.as_slice(), q.as_slice()))
}

/// `kl(p, q) + kl(q, p)`. Exactly symmetric: the two one-sided values are
/// computed separately and added.
pub fn sym_kl(p: &Distribution, q: &Distribution) -> Result<f64> {
    Ok(kl(p, q)? + kl(q, p)?)
}

/// Symmetric KL on the β0 profiles plus symmetric KL on the β1 profiles.
pub fn php_distance(a: &PHProfile, b: &PHProfile) -> Result<f64> {
    if a.filtration() != b.filtration() {
        return Err(Error::Contract(
            "PHP distance between profiles computed on different filtrations".into(),
        ));
    }
    Ok(sym_kl(a.p0(), b.p0())? + sym_kl(a.p1(), b.p1())?)
}
