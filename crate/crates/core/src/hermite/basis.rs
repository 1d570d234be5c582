use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::quadrature::GaussHermite;
use crate::error::{Error, Result};

/// Truncation of the Hermite basis: `n` functions `h_0..h_{n-1}` and a
/// Gauss–Hermite rule of order `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisSpec {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Q")]
    pub q: usize,
}

impl BasisSpec {
    pub const DEFAULT_N: usize = 64;

    /// Basis with the default quadrature order `Q = 2N`.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_quadrature(n, 2 * n)
    }

    pub fn with_quadrature(n: usize, q: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!(
                "basis size N = {n} must be at least 2"
            )));
        }
        if q < 2 * n {
            return Err(Error::invalid(format!(
                "quadrature order Q = {q} must be at least 2N = {}",
                2 * n
            )));
        }
        Ok(Self { n, q })
    }

    pub(crate) fn ensure_same(&self, other: &BasisSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::BasisMismatch {
                left: *self,
                right: *other,
            })
        }
    }
}

impl Default for BasisSpec {
    fn default() -> Self {
        Self {
            n: Self::DEFAULT_N,
            q: 2 * Self::DEFAULT_N,
        }
    }
}

/// Fills `out[k] = h_k(x)` for `k < out.len()` using the three-term recurrence
/// on the orthonormal Hermite functions.
pub fn hermite_functions(x: f64, out: &mut [f64]) {
    let n = out.len();
    if n == 0 {
        return;
    }
    out[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    if n == 1 {
        return;
    }
    out[1] = std::f64::consts::SQRT_2 * x * out[0];
    for k in 1..n - 1 {
        let kf = k as f64;
        out[k + 1] = (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
}

/// Sum `Σ c_k h_k(x)`.
pub fn evaluate_series(coeffs: &[f64], x: f64) -> f64 {
    let mut h = vec![0.0; coeffs.len()];
    hermite_functions(x, &mut h);
    coeffs.iter().zip(&h).map(|(c, v)| c * v).sum()
}

/// A basis specification together with its quadrature rule and the table of
/// basis values at the quadrature nodes. Cheap to clone.
#[derive(Debug, Clone)]
pub struct HermiteBasis {
    spec: BasisSpec,
    inner: Arc<BasisTables>,
}

#[derive(Debug)]
struct BasisTables {
    quadrature: GaussHermite,
    /// Row `i` holds `h_0(x_i)..h_{N-1}(x_i)`.
    values: Vec<f64>,
}

impl HermiteBasis {
    pub fn new(spec: BasisSpec) -> Self {
        let quadrature = GaussHermite::new(spec.q);
        let mut values = vec![0.0; spec.q * spec.n];
        for (row, x) in values.chunks_mut(spec.n).zip(quadrature.nodes()) {
            hermite_functions(*x, row);
        }
        Self {
            spec,
            inner: Arc::new(BasisTables { quadrature, values }),
        }
    }

    pub fn spec(&self) -> BasisSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.spec.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn quadrature(&self) -> &GaussHermite {
        &self.inner.quadrature
    }

    /// Quadrature nodes at which `project_function` expects samples.
    pub fn nodes(&self) -> &[f64] {
        self.inner.quadrature.nodes()
    }

    pub fn values_at_node(&self, i: usize) -> &[f64] {
        &self.inner.values[i * self.spec.n..(i + 1) * self.spec.n]
    }

    /// Coefficients `c_k ≈ ∫ φ(x) h_k(x) dx` from samples of `φ` at the nodes.
    pub fn project_function(&self, samples: &[f64]) -> Result<TestFunction> {
        if samples.len() != self.spec.q {
            return Err(Error::invalid(format!(
                "expected {} samples at the quadrature nodes, got {}",
                self.spec.q,
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at node {i}")));
        }
        let mut coeffs = vec![0.0; self.spec.n];
        for (i, (s, w)) in samples
            .iter()
            .zip(self.quadrature().function_weights())
            .enumerate()
        {
            let ws = s * w;
            for (c, h) in coeffs.iter_mut().zip(self.values_at_node(i)) {
                *c += ws * h;
            }
        }
        TestFunction::new(self.spec, coeffs)
    }

    /// Convenience: sample `f` at the nodes and project.
    pub fn project(&self, f: impl Fn(f64) -> f64) -> Result<TestFunction> {
        let samples: Vec<f64> = self.nodes().iter().map(|&x| f(x)).collect();
        self.project_function(&samples)
    }

    /// Values `Σ c_k h_k(x_i)` at every quadrature node.
    pub fn reconstruct_at_nodes(&self, coeffs: &[f64]) -> Vec<f64> {
        (0..self.spec.q)
            .map(|i| {
                self.values_at_node(i)
                    .iter()
                    .zip(coeffs)
                    .map(|(h, c)| h * c)
                    .sum()
            })
            .collect()
    }

    /// Gram matrix of the basis under the quadrature rule.
    pub fn gram_matrix(&self) -> nalgebra::DMatrix<f64> {
        let n = self.spec.n;
        let mut g = nalgebra::DMatrix::<f64>::zeros(n, n);
        for (i, w) in self.quadrature().function_weights().iter().enumerate() {
            let h = self.values_at_node(i);
            for a in 0..n {
                let wa = w * h[a];
                for b in 0..n {
                    g[(a, b)] += wa * h[b];
                }
            }
        }
        g
    }
}

fn check_finite(coeffs: &[f64]) -> Result<()> {
    match coeffs.iter().position(|v| !v.is_finite()) {
        Some(k) => Err(Error::invalid(format!("non-finite coefficient at k = {k}"))),
        None => Ok(()),
    }
}

fn check_len(spec: &BasisSpec, coeffs: &[f64]) -> Result<()> {
    if coeffs.len() != spec.n {
        return Err(Error::invalid(format!(
            "expected {} coefficients, got {}",
            spec.n,
            coeffs.len()
        )));
    }
    Ok(())
}

/// `φ = Σ c_k h_k`, an element of the truncated test-function space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    basis: BasisSpec,
    coeffs: Vec<f64>,
}

impl TestFunction {
    pub fn new(basis: BasisSpec, coeffs: Vec<f64>) -> Result<Self> {
        check_len(&basis, &coeffs)?;
        check_finite(&coeffs)?;
        Ok(Self { basis, coeffs })
    }

    /// Pads a short coefficient list with zeros.
    pub fn from_leading(basis: BasisSpec, leading: &[f64]) -> Result<Self> {
        if leading.len() > basis.n {
            return Err(Error::invalid(format!(
                "{} coefficients exceed basis size {}",
                leading.len(),
                basis.n
            )));
        }
        let mut coeffs = vec![0.0; basis.n];
        coeffs[..leading.len()].copy_from_slice(leading);
        Self::new(basis, coeffs)
    }

    pub fn zero(basis: BasisSpec) -> Self {
        Self {
            basis,
            coeffs: vec![0.0; basis.n],
        }
    }

    /// The basis function `h_k`.
    pub fn hermite(basis: BasisSpec, k: usize) -> Self {
        assert!(k < basis.n, "h_{k} is outside a basis of size {}", basis.n);
        let mut f = Self::zero(basis);
        f.coeffs[k] = 1.0;
        f
    }

    pub fn basis(&self) -> BasisSpec {
        self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        evaluate_series(&self.coeffs, x)
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            basis: self.basis,
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &TestFunction, b: f64) -> Result<Self> {
        self.basis.ensure_same(&other.basis)?;
        Ok(Self {
            basis: self.basis,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    /// Applies an `N×N` matrix to the coefficient vector.
    pub fn apply(&self, m: &nalgebra::DMatrix<f64>) -> Self {
        let v = m * nalgebra::DVector::from_column_slice(&self.coeffs);
        Self {
            basis: self.basis,
            coeffs: v.as_slice().to_vec(),
        }
    }
}

/// `f ∈ Φ'` restricted to the truncated basis: `⟨f, φ⟩ = Σ f_k c_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualElement {
    basis: BasisSpec,
    coeffs: Vec<f64>,
}

impl DualElement {
    pub fn new(basis: BasisSpec, coeffs: Vec<f64>) -> Result<Self> {
        check_len(&basis, &coeffs)?;
        check_finite(&coeffs)?;
        Ok(Self { basis, coeffs })
    }

    pub fn zero(basis: BasisSpec) -> Self {
        Self {
            basis,
            coeffs: vec![0.0; basis.n],
        }
    }

    pub fn unit(basis: BasisSpec, k: usize) -> Self {
        assert!(
            k < basis.n,
            "coordinate {k} is outside a basis of size {}",
            basis.n
        );
        let mut f = Self::zero(basis);
        f.coeffs[k] = 1.0;
        f
    }

    pub fn basis(&self) -> BasisSpec {
        self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn apply(&self, m: &nalgebra::DMatrix<f64>) -> Self {
        let v = m * nalgebra::DVector::from_column_slice(&self.coeffs);
        Self {
            basis: self.basis,
            coeffs: v.as_slice().to_vec(),
        }
    }

    pub fn sub(&self, other: &DualElement) -> Result<Self> {
        self.basis.ensure_same(&other.basis)?;
        Ok(Self {
            basis: self.basis,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }
}

impl From<&TestFunction> for DualElement {
    /// Embeds `φ` into the dual via the `L²` pairing.
    fn from(phi: &TestFunction) -> Self {
        Self {
            basis: phi.basis,
            coeffs: phi.coeffs.clone(),
        }
    }
}

/// Canonical pairing `⟨f, φ⟩`.
pub fn pairing(f: &DualElement, phi: &TestFunction) -> Result<f64> {
    f.basis.ensure_same(&phi.basis)?;
    Ok(dot(&f.coeffs, &phi.coeffs))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
