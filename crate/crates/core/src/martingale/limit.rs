//! Sampling of the Gaussian limit martingale `M⁰` through its covariance.
//!
//! For test functions `φ_1..φ_m`, the vector `(M⁰_t(φ_a))_a` has independent
//! Gaussian increments with covariance `C(t_{j+1}) − C(t_j)` over each grid
//! interval. Each increment covariance is factored by a symmetric square root.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::variance::QuadraticForm;
use crate::error::{Error, Result};
use crate::hermite::{BasisSpec, TestFunction};
use crate::paths::{DualPath, ScalarPathEnsemble, TimeGrid};
use crate::rng::{Purpose, StreamKey};

/// Eigenvalues below this threshold indicate a broken quadrature.
pub const INTEGRITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct LimitSampler {
    grid: TimeGrid,
    dim: usize,
    factors: Vec<DMatrix<f64>>,
}

/// Symmetric square root of a covariance matrix. Slightly negative
/// eigenvalues (rounding) are clipped to zero.
pub fn covariance_sqrt(c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(c.clone());
    let min = eig.eigenvalues.min();
    if min < -INTEGRITY_TOLERANCE {
        return Err(Error::NumericalIntegrity(format!(
            "covariance increment has eigenvalue {min:e}"
        )));
    }
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let q = &eig.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&roots) * q.transpose())
}

impl LimitSampler {
    pub fn new(form: &QuadraticForm, fns: &[&TestFunction], grid: TimeGrid) -> Result<Self> {
        if fns.is_empty() {
            return Err(Error::invalid(
                "limit sampler needs at least one test function",
            ));
        }
        let factors = form
            .grid_increments(fns, grid)?
            .iter()
            .map(covariance_sqrt)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid,
            dim: fns.len(),
            factors,
        })
    }

    /// Sampler for the coordinates `M⁰(h_k)`, `k < N`.
    pub fn for_basis(form: &QuadraticForm, grid: TimeGrid) -> Result<Self> {
        let basis = form.basis();
        let fns: Vec<TestFunction> = (0..basis.n)
            .map(|k| TestFunction::hermite(basis, k))
            .collect();
        let refs: Vec<&TestFunction> = fns.iter().collect();
        Self::new(form, &refs, grid)
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// One path, row-major `(J+1) × dim`, starting at zero.
    pub fn sample(&self, key: StreamKey) -> Vec<f64> {
        let mut rng = key.rng();
        let m = self.dim;
        let mut out = vec![0.0; self.grid.len() * m];
        let mut xi = DVector::<f64>::zeros(m);
        for (j, factor) in self.factors.iter().enumerate() {
            for v in xi.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
            let inc = factor * &xi;
            let (head, tail) = out.split_at_mut((j + 1) * m);
            let prev = &head[j * m..];
            for ((next, p), d) in tail[..m].iter_mut().zip(prev).zip(inc.iter()) {
                *next = p + d;
            }
        }
        out
    }

    /// One path as a dual path (requires the sampler to be built with [`LimitSampler::for_basis`]).
    pub fn sample_dual(&self, basis: BasisSpec, key: StreamKey) -> Result<DualPath> {
        if basis.n != self.dim {
            return Err(Error::invalid("sampler dimension differs from basis size"));
        }
        DualPath::new(self.grid, basis, self.sample(key))
    }
}

/// Jointly sampled limit paths `M⁰(φ)` for each `φ` in `fns`: `paths` draws,
/// path `m` from stream `(seed, LimitDriver, m)`.
pub fn simulate_limit(
    fns: &[TestFunction],
    grid: TimeGrid,
    paths: usize,
    seed: u64,
) -> Result<Vec<ScalarPathEnsemble>> {
    let first = fns
        .first()
        .ok_or_else(|| Error::invalid("simulate_limit needs a nonempty test-function list"))?;
    let form = QuadraticForm::new(first.basis());
    let refs: Vec<&TestFunction> = fns.iter().collect();
    let sampler = LimitSampler::new(&form, &refs, grid)?;
    let base = StreamKey::new(seed, Purpose::LimitDriver, 0);
    let raw: Vec<Vec<f64>> = (0..paths as u64)
        .into_par_iter()
        .map(|m| sampler.sample(base.with_index(m)))
        .collect();
    let dim = fns.len();
    (0..dim)
        .map(|a| {
            let per_fn = raw
                .iter()
                .map(|p| p.iter().skip(a).step_by(dim).copied().collect())
                .collect();
            ScalarPathEnsemble::new(grid, per_fn, Some(base))
        })
        .collect()
}
