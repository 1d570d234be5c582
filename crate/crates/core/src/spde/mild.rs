//! Mild solution of `dY = ΔY dt + dM`, `Y_0 = η`, on a time grid.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{dot, heat_matrix, laplacian_op, BasisSpec, DualElement, TestFunction};
use crate::paths::{DualPath, TimeGrid};

/// Reusable solver for one `(basis, grid)` pair; holds `E(dt)` and `L`.
#[derive(Debug, Clone)]
pub struct HeatSolver {
    basis: BasisSpec,
    grid: TimeGrid,
    step: DMatrix<f64>,
    laplacian: DMatrix<f64>,
}

impl HeatSolver {
    pub fn new(basis: BasisSpec, grid: TimeGrid) -> Result<Self> {
        Ok(Self {
            basis,
            grid,
            step: heat_matrix(grid.dt(), basis)?,
            laplacian: laplacian_op(basis),
        })
    }

    pub fn basis(&self) -> BasisSpec {
        self.basis
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    /// `Y_j = E(t_j)η + dt·Σ_l w_l E(t_j − t_l) L M_l + M_j` with trapezoid
    /// weights `w_0 = w_j = 1/2`.
    ///
    /// The convolution is accumulated as `R_0 = ½ L M_0`,
    /// `R_{j+1} = E(dt) R_j + L M_{j+1}`, so that the sum at `t_j` equals
    /// `R_j − ½ L M_j`. Cost is `O(J N²)`.
    pub fn solve(&self, m: &DualPath, eta: &DualElement) -> Result<DualPath> {
        self.basis.ensure_same(&m.basis())?;
        self.basis.ensure_same(&eta.basis())?;
        if m.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let n = self.basis.n;
        let dt = self.grid.dt();
        let lm = |j: usize| &self.laplacian * DVector::from_column_slice(m.state(j));

        let mut y = DualPath::zero(self.grid, self.basis);
        let mut free = DVector::from_column_slice(eta.coeffs());
        let mut lm_j = lm(0);
        let mut acc = &lm_j * 0.5;
        y.state_mut(0)
            .iter_mut()
            .zip(free.iter().zip(m.state(0)))
            .for_each(|(out, (e, mm))| *out = e + mm);
        for j in 1..self.grid.len() {
            free = &self.step * free;
            lm_j = lm(j);
            acc = &self.step * acc + &lm_j;
            let out = y.state_mut(j);
            for k in 0..n {
                let duhamel = acc[k] - 0.5 * lm_j[k];
                out[k] = free[k] + dt * duhamel + m.state(j)[k];
            }
        }
        Ok(y)
    }
}

/// One-shot form of [`HeatSolver::solve`].
pub fn mild_solution(m: &DualPath, eta: &DualElement, grid: TimeGrid) -> Result<DualPath> {
    HeatSolver::new(m.basis(), grid)?.solve(m, eta)
}

/// `max_j |Y_{t_j}(φ) − η(φ) − ∫₀^{t_j} Y_r(Lφ) dr − M_{t_j}(φ)|`, the
/// integral by the trapezoid rule on the grid.
pub fn weak_form_residual(
    y: &DualPath,
    m: &DualPath,
    eta: &DualElement,
    phi: &TestFunction,
) -> Result<f64> {
    y.ensure_compatible(m)?;
    let basis = y.basis();
    basis.ensure_same(&eta.basis())?;
    basis.ensure_same(&phi.basis())?;
    let lphi = phi.apply(&laplacian_op(basis));
    let dt = y.grid().dt();
    let eta_phi = dot(eta.coeffs(), phi.coeffs());
    let mut integral = 0.0;
    let mut prev = dot(y.state(0), lphi.coeffs());
    let mut worst = (dot(y.state(0), phi.coeffs()) - eta_phi - dot(m.state(0), phi.coeffs())).abs();
    for j in 1..y.grid().len() {
        let cur = dot(y.state(j), lphi.coeffs());
        integral += 0.5 * dt * (prev + cur);
        prev = cur;
        let r = dot(y.state(j), phi.coeffs()) - eta_phi - integral - dot(m.state(j), phi.coeffs());
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Residuals of the same driver observed on successively coarser grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub steps: Vec<usize>,
    pub dts: Vec<f64>,
    /// Mean residual over the repetitions, per grid.
    pub residuals: Vec<f64>,
    /// Least-squares slope of `log residual` against `log dt`.
    pub slope: f64,
}

/// Least-squares slope of `y` against `x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = crate::stats::mean(&lx);
    let my = crate::stats::mean(&ly);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Solves on each coarsening of every fine driver in `drivers` (factors
/// `1, 2, 4, …` as given) and averages the weak-form residuals.
pub fn residual_refinement(
    drivers: &[(DualPath, DualElement)],
    factors: &[usize],
    phi: &TestFunction,
) -> Result<RefinementStudy> {
    use rayon::prelude::*;
    let (first, _) = drivers
        .first()
        .ok_or_else(|| Error::invalid("refinement study needs at least one driver"))?;
    if factors.len() < 2 {
        return Err(Error::invalid("refinement study needs at least two grids"));
    }
    let mut steps = Vec::new();
    let mut dts = Vec::new();
    let mut residuals = Vec::new();
    for &f in factors {
        let grid = first.grid().coarsen(f)?;
        let solver = HeatSolver::new(first.basis(), grid)?;
        let per_rep: Vec<f64> = drivers
            .par_iter()
            .map(|(m, eta)| {
                let coarse = m.subsample(f)?;
                let y = solver.solve(&coarse, eta)?;
                weak_form_residual(&y, &coarse, eta, phi)
            })
            .collect::<Result<_>>()?;
        steps.push(grid.steps());
        dts.push(grid.dt());
        residuals.push(crate::stats::mean(&per_rep));
    }
    let slope = loglog_slope(&dts, &residuals);
    Ok(RefinementStudy {
        steps,
        dts,
        residuals,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{heat_flow_h0, HermiteBasis};
    use crate::martingale::simulate_particles;
    use crate::rng::{Purpose, StreamKey};
    use crate::spde::mn_dual_path;

    fn driver(spec: BasisSpec, grid: TimeGrid, rep: u64) -> DualPath {
        let p = simulate_particles(40, grid, StreamKey::new(17, Purpose::Particles, rep)).unwrap();
        mn_dual_path(&p, spec).unwrap()
    }

    #[test]
    fn zero_in_zero_out() {
        let spec = BasisSpec::new(8).unwrap();
        let grid = TimeGrid::new(1.0, 50).unwrap();
        let m = DualPath::zero(grid, spec);
        let y = mild_solution(&m, &DualElement::zero(spec), grid).unwrap();
        assert_eq!(y, m);
        let phi = TestFunction::hermite(spec, 1);
        assert_eq!(
            weak_form_residual(&y, &m, &DualElement::zero(spec), &phi).unwrap(),
            0.0
        );
    }

    #[test]
    fn pure_heat_flow_matches_oracle() {
        let spec = BasisSpec::new(64).unwrap();
        let grid = TimeGrid::new(1.0, 20).unwrap();
        let eta = DualElement::unit(spec, 0);
        let y = mild_solution(&DualPath::zero(grid, spec), &eta, grid).unwrap();
        let basis = HermiteBasis::new(spec);
        for j in [0, 5, 20] {
            let t = grid.node(j);
            let oracle = basis.project(|x| heat_flow_h0(t, x)).unwrap();
            let err = y
                .state(j)
                .iter()
                .zip(oracle.coeffs())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(err < 1e-4, "t={t} err={err}");
            assert!((y.state(j)[0] - (1.0 + t).powf(-0.5)).abs() < 1e-4);
        }
    }

    #[test]
    fn semigroup_consistency() {
        let spec = BasisSpec::new(16).unwrap();
        let grid = TimeGrid::new(1.0, 40).unwrap();
        let eta =
            DualElement::new(spec, (0..16).map(|k| 1.0 / (k as f64 + 1.0)).collect()).unwrap();
        let y = mild_solution(&DualPath::zero(grid, spec), &eta, grid).unwrap();
        let e = heat_matrix(grid.node(15), spec).unwrap();
        let shifted = y.element(10).apply(&e);
        for (a, b) in shifted.coeffs().iter().zip(y.state(25)) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn linear_in_driver_and_initial_condition() {
        let spec = BasisSpec::new(10).unwrap();
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let (m1, m2) = (driver(spec, grid, 0), driver(spec, grid, 1));
        let e1 = DualElement::unit(spec, 2);
        let e2 = DualElement::new(spec, vec![0.5; 10]).unwrap();
        let solver = HeatSolver::new(spec, grid).unwrap();
        let sum = solver
            .solve(
                &m1.add(&m2).unwrap(),
                &DualElement::new(spec, vec![0.5, 0.5, 1.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5])
                    .unwrap(),
            )
            .unwrap();
        let parts = solver
            .solve(&m1, &e1)
            .unwrap()
            .add(&solver.solve(&m2, &e2).unwrap())
            .unwrap();
        for j in 0..grid.len() {
            for (a, b) in sum.state(j).iter().zip(parts.state(j)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn residual_small_and_first_order() {
        let spec = BasisSpec::new(16).unwrap();
        let grid = TimeGrid::new(1.0, 1024).unwrap();
        let drivers: Vec<(DualPath, DualElement)> = (0..6)
            .map(|r| (driver(spec, grid, r), DualElement::unit(spec, 0)))
            .collect();
        let phi = TestFunction::hermite(spec, 0);
        let study = residual_refinement(&drivers, &[1, 2, 4, 8], &phi).unwrap();
        assert!(
            study
                .residuals
                .iter()
                .zip(&study.dts)
                .all(|(r, dt)| *r < 10.0 * dt),
            "{study:?}"
        );
        assert!(study.slope >= 0.7, "{study:?}");
    }

    #[test]
    fn mismatches_rejected() {
        let spec = BasisSpec::new(8).unwrap();
        let other = BasisSpec::new(9).unwrap();
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let m = DualPath::zero(grid, spec);
        assert!(mild_solution(&m, &DualElement::zero(other), grid).is_err());
        assert!(mild_solution(
            &m,
            &DualElement::zero(spec),
            TimeGrid::new(1.0, 20).unwrap()
        )
        .is_err());
    }
}
