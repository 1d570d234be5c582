//! The limiting quadratic form `A(t, φ) = ∫₀ᵗ E[φ'(B_s)²] ds` and its
//! polarization `C(t; φ, ψ) = ∫₀ᵗ E[φ'(B_s) ψ'(B_s)] ds`, where `B_s ~ N(0, s)`
//! is the position of a standard Brownian motion.
//!
//! The inner expectation is a Gauss–Hermite sum after the substitution
//! `B_s = √(2s) x`; the outer time integral is composite Gauss–Legendre. The
//! integrand is smooth in `s` up to `s = 0`, where it equals `φ'(0)²`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hermite::{
    derivative_op, dot, hermite_functions, BasisSpec, GaussHermite, GaussLegendre, TestFunction,
};
use crate::paths::TimeGrid;

/// Evaluator for `A` and `C` on one basis, with cached quadrature rules.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    basis: BasisSpec,
    derivative: DMatrix<f64>,
    inner: GaussHermite,
    outer: GaussLegendre,
    panels: usize,
}

impl QuadraticForm {
    /// Inner Gauss–Hermite order used unless the basis asks for more.
    pub const MIN_INNER_ORDER: usize = 128;

    pub fn new(basis: BasisSpec) -> Self {
        Self::with_orders(basis, basis.q.max(Self::MIN_INNER_ORDER), 16, 16)
    }

    pub fn with_orders(
        basis: BasisSpec,
        inner_order: usize,
        outer_order: usize,
        panels: usize,
    ) -> Self {
        Self {
            basis,
            derivative: derivative_op(basis),
            inner: GaussHermite::new(inner_order),
            outer: GaussLegendre::new(outer_order),
            panels: panels.max(1),
        }
    }

    pub fn basis(&self) -> BasisSpec {
        self.basis
    }

    fn gradients(&self, fns: &[&TestFunction]) -> Result<Vec<Vec<f64>>> {
        fns.iter()
            .map(|f| {
                self.basis.ensure_same(&f.basis())?;
                Ok(f.apply(&self.derivative).coeffs().to_vec())
            })
            .collect()
    }

    /// `G(s)_{ab} = E[φ_a'(B_s) φ_b'(B_s)]` for derivative coefficient vectors `grads`.
    fn integrand(&self, grads: &[Vec<f64>], s: f64) -> DMatrix<f64> {
        let m = grads.len();
        let mut out = DMatrix::<f64>::zeros(m, m);
        let mut h = vec![0.0; self.basis.n];
        let mut slopes = vec![0.0; m];
        let mut accumulate = |x: f64, w: f64, out: &mut DMatrix<f64>| {
            hermite_functions(x, &mut h);
            for (sl, g) in slopes.iter_mut().zip(grads) {
                *sl = dot(g, &h);
            }
            for a in 0..m {
                let wa = w * slopes[a];
                for b in a..m {
                    out[(a, b)] += wa * slopes[b];
                }
            }
        };
        if s == 0.0 {
            accumulate(0.0, 1.0, &mut out);
        } else {
            let scale = (2.0 * s).sqrt();
            let norm = 1.0 / std::f64::consts::PI.sqrt();
            for (x, w) in self.inner.nodes().iter().zip(self.inner.weights()) {
                accumulate(scale * x, norm * w, &mut out);
            }
        }
        for a in 0..m {
            for b in 0..a {
                out[(a, b)] = out[(b, a)];
            }
        }
        out
    }

    /// `E[φ'(B_s)²]`.
    pub fn variance_rate(&self, phi: &TestFunction, s: f64) -> Result<f64> {
        let g = self.gradients(&[phi])?;
        Ok(self.integrand(&g, s)[(0, 0)])
    }

    /// `C(t; φ_a, φ_b)` for every pair in `fns`.
    pub fn covariance_matrix(&self, fns: &[&TestFunction], t: f64) -> Result<DMatrix<f64>> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid(format!("time must be >= 0, got {t}")));
        }
        let grads = self.gradients(fns)?;
        let m = fns.len();
        if t == 0.0 {
            return Ok(DMatrix::zeros(m, m));
        }
        let width = t / self.panels as f64;
        let mut total = DMatrix::<f64>::zeros(m, m);
        for p in 0..self.panels {
            let lo = p as f64 * width;
            for (s, w) in self.outer.mapped(lo, lo + width) {
                total += self.integrand(&grads, s) * w;
            }
        }
        Ok(total)
    }

    /// `A(t, φ)`.
    pub fn limit_variance(&self, phi: &TestFunction, t: f64) -> Result<f64> {
        Ok(self.covariance_matrix(&[phi], t)?[(0, 0)])
    }

    /// `C(t; φ, ψ)`.
    pub fn cross_covariance(&self, phi: &TestFunction, psi: &TestFunction, t: f64) -> Result<f64> {
        Ok(self.covariance_matrix(&[phi, psi], t)?[(0, 1)])
    }

    /// Increments `C(t_{j+1}) − C(t_j)` over every grid interval, each computed
    /// with a 4-point Gauss–Legendre rule on its own interval.
    pub fn grid_increments(
        &self,
        fns: &[&TestFunction],
        grid: TimeGrid,
    ) -> Result<Vec<DMatrix<f64>>> {
        let grads = self.gradients(fns)?;
        let local = GaussLegendre::new(4);
        Ok((0..grid.steps())
            .into_par_iter()
            .map(|j| {
                let (a, b) = (grid.node(j), grid.node(j + 1));
                let mut acc = DMatrix::<f64>::zeros(fns.len(), fns.len());
                for (s, w) in local.mapped(a, b) {
                    acc += self.integrand(&grads, s) * w;
                }
                acc
            })
            .collect())
    }
}

/// `A(t, φ)` on the default quadrature for `φ`'s basis.
pub fn limit_variance(phi: &TestFunction, t: f64) -> Result<f64> {
    QuadraticForm::new(phi.basis()).limit_variance(phi, t)
}

/// `C(t; φ, ψ)` on the default quadrature.
pub fn cross_covariance(phi: &TestFunction, psi: &TestFunction, t: f64) -> Result<f64> {
    QuadraticForm::new(phi.basis()).cross_covariance(phi, psi, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> BasisSpec {
        BasisSpec::new(16).unwrap()
    }

    #[test]
    fn zero_time_and_negative_time() {
        let phi = TestFunction::hermite(spec(), 1);
        assert_eq!(limit_variance(&phi, 0.0).unwrap(), 0.0);
        assert!(limit_variance(&phi, -1.0).is_err());
        assert!(cross_covariance(&phi, &phi, -0.5).is_err());
    }

    #[test]
    fn closed_form_for_h0() {
        // E[h0'(B_s)^2] = s / (√π (2s+1)^{3/2}), integrated over [0, 1].
        let a = limit_variance(&TestFunction::hermite(spec(), 0), 1.0).unwrap();
        let exact = (2.0 / 3f64.sqrt() - 1.0) / std::f64::consts::PI.sqrt();
        assert!((a - exact).abs() < 1e-12, "{a} vs {exact}");
    }

    #[test]
    fn rate_at_zero_is_squared_slope() {
        let form = QuadraticForm::new(spec());
        let phi = TestFunction::hermite(spec(), 1);
        // h1'(0) = √2 π^{-1/4}
        let expect = 2.0 / std::f64::consts::PI.sqrt();
        assert!((form.variance_rate(&phi, 0.0).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn polarization_and_homogeneity() {
        let form = QuadraticForm::new(spec());
        let phi = TestFunction::from_leading(spec(), &[0.4, -0.3, 0.9, 0.1]).unwrap();
        let psi = TestFunction::from_leading(spec(), &[-0.2, 0.5, 0.0, 0.7, 0.3]).unwrap();
        let a = form.limit_variance(&phi, 0.8).unwrap();
        assert!((form.cross_covariance(&phi, &phi, 0.8).unwrap() - a).abs() < 1e-10);
        let c1 = form.cross_covariance(&phi, &psi, 0.8).unwrap();
        let c2 = form.cross_covariance(&psi, &phi, 0.8).unwrap();
        assert_eq!(c1, c2);
        let b = form.limit_variance(&psi, 0.8).unwrap();
        assert!(c1.abs() <= (a * b).sqrt());
        let a3 = form.limit_variance(&phi.scaled(-3.0), 0.8).unwrap();
        assert!((a3 - 9.0 * a).abs() < 1e-12 * a3.abs().max(1.0));
    }

    #[test]
    fn grid_increments_sum_to_total() {
        let form = QuadraticForm::new(spec());
        let phi = TestFunction::hermite(spec(), 2);
        let psi = TestFunction::hermite(spec(), 3);
        let grid = TimeGrid::new(1.0, 50).unwrap();
        let incs = form.grid_increments(&[&phi, &psi], grid).unwrap();
        let total = incs.iter().fold(DMatrix::zeros(2, 2), |acc, m| acc + m);
        let direct = form.covariance_matrix(&[&phi, &psi], 1.0).unwrap();
        assert!((total - direct).abs().max() < 1e-12);
        assert!(incs.iter().all(|m| m[(0, 0)] >= 0.0 && m[(1, 1)] >= 0.0));
    }
}
