//! The Hilbertian seminorm ladder `p_r(φ)² = Σ (2k+1)^{2r} c_k²` and its duals.

use serde::{Deserialize, Serialize};

use super::basis::{DualElement, TestFunction};
use crate::error::{Error, Result};

/// Regularity index `r ≥ 0`; weights `(2k+1)^r`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SeminormIndex(f64);

impl SeminormIndex {
    pub fn new(r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::invalid(format!(
                "seminorm index must be finite and >= 0, got {r}"
            )));
        }
        Ok(Self(r))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn weight(self, k: usize) -> f64 {
        (2.0 * k as f64 + 1.0).powf(self.0)
    }
}

impl TryFrom<f64> for SeminormIndex {
    type Error = Error;
    fn try_from(r: f64) -> Result<Self> {
        Self::new(r)
    }
}

impl From<SeminormIndex> for f64 {
    fn from(r: SeminormIndex) -> f64 {
        r.0
    }
}

pub fn seminorm(phi: &TestFunction, r: SeminormIndex) -> f64 {
    weighted_norm(phi.coeffs(), r.0)
}

pub fn dual_norm(f: &DualElement, r: SeminormIndex) -> f64 {
    weighted_norm(f.coeffs(), -r.0)
}

/// `(Σ (2k+1)^{2e} v_k²)^{1/2}`; `e < 0` gives dual norms.
pub(crate) fn weighted_norm(v: &[f64], exponent: f64) -> f64 {
    v.iter()
        .enumerate()
        .map(|(k, c)| {
            let w = (2.0 * k as f64 + 1.0).powf(exponent);
            (w * c) * (w * c)
        })
        .sum::<f64>()
        .sqrt()
}

/// Hilbert–Schmidt norm of the truncated inclusion between two completions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsNorm {
    pub value: f64,
    /// Whether the untruncated series converges, i.e. `s - r > 1/2`.
    pub converges: bool,
}

impl HsNorm {
    pub fn squared(&self) -> f64 {
        self.value * self.value
    }
}

pub fn hs_norm(r: SeminormIndex, s: SeminormIndex, n: usize) -> Result<HsNorm> {
    let gap = s.0 - r.0;
    if gap <= 0.0 {
        return Err(Error::invalid(format!(
            "inclusion p_{} -> p_{} is not Hilbert-Schmidt (need s > r)",
            r.0, s.0
        )));
    }
    // Summed from the smallest term up.
    let squared: f64 = (0..n)
        .rev()
        .map(|k| (2.0 * k as f64 + 1.0).powf(-2.0 * gap))
        .sum();
    Ok(HsNorm {
        value: squared.sqrt(),
        converges: gap > 0.5,
    })
}

/// Upper bound on the neglected tail `Σ_{k≥N} (2k+1)^{-2g}` of the squared
/// HS series, by comparison with `∫_{N-1}^∞ (2x+1)^{-2g} dx`. Infinite when the
/// series diverges.
pub fn hs_tail_bound(r: SeminormIndex, s: SeminormIndex, n: usize) -> f64 {
    let g = s.0 - r.0;
    if g <= 0.5 {
        return f64::INFINITY;
    }
    let base = (2.0 * n as f64 - 1.0).max(1.0);
    base.powf(1.0 - 2.0 * g) / (2.0 * (2.0 * g - 1.0))
}

/// A finite chain `r_1 < … < r_m` whose consecutive inclusions are Hilbert–Schmidt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeminormFamily {
    indices: Vec<SeminormIndex>,
}

impl SeminormFamily {
    pub fn new(indices: Vec<SeminormIndex>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::invalid("seminorm family must be nonempty"));
        }
        for w in indices.windows(2) {
            if w[1].0 - w[0].0 <= 0.5 {
                return Err(Error::invalid(format!(
                    "gap between r = {} and r = {} must exceed 1/2",
                    w[0].0, w[1].0
                )));
            }
        }
        Ok(Self { indices })
    }

    pub fn indices(&self) -> &[SeminormIndex] {
        &self.indices
    }

    /// HS norms of each consecutive truncated inclusion.
    pub fn inclusion_norms(&self, n: usize) -> Vec<HsNorm> {
        self.indices
            .windows(2)
            .map(|w| hs_norm(w[0], w[1], n).expect("family indices are increasing"))
            .collect()
    }
}
