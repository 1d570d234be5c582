use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermite::{dot, BasisSpec, DualElement, TestFunction};
use crate::rng::StreamKey;

/// Uniform grid `t_j = jT/J`, `j = 0..=J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    #[serde(rename = "T")]
    horizon: f64,
    #[serde(rename = "J")]
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid(format!(
                "horizon T must be > 0, got {horizon}"
            )));
        }
        if steps == 0 {
            return Err(Error::invalid("step count J must be >= 1"));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.horizon / self.steps as f64
    }

    /// Index of the node at time `t`; `t` must lie on the grid.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = t / self.dt();
        let j = x.round();
        if !(0.0..=self.steps as f64).contains(&j) || (x - j).abs() > 1e-9 * x.abs().max(1.0) {
            return Err(Error::invalid(format!(
                "time {t} is not a node of the grid"
            )));
        }
        Ok(j as usize)
    }

    /// Number of grid gaps `|t_i - t_j| <= delta` spans (non-strict).
    pub fn lag_for(&self, delta: f64) -> Result<usize> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::invalid(format!(
                "modulus window must be > 0, got {delta}"
            )));
        }
        if delta > self.horizon * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "modulus window {delta} exceeds horizon {}",
                self.horizon
            )));
        }
        Ok(((delta / self.dt()) * (1.0 + 1e-12))
            .floor()
            .min(self.steps as f64) as usize)
    }

    /// Every `factor`-th node of this grid.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.steps.is_multiple_of(factor) {
            return Err(Error::invalid(format!(
                "cannot coarsen {} steps by {factor}",
                self.steps
            )));
        }
        Self::new(self.horizon, self.steps / factor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarPath {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl ScalarPath {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "path has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("path contains non-finite values"));
        }
        Ok(Self { grid, values })
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        Ok(self.values[self.grid.index_of(t)?])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarPathEnsemble {
    pub grid: TimeGrid,
    pub paths: Vec<Vec<f64>>,
    /// Base stream of the ensemble; path `m` was drawn from `with_index(m)`.
    pub provenance: Option<StreamKey>,
}

impl ScalarPathEnsemble {
    pub fn new(
        grid: TimeGrid,
        paths: Vec<Vec<f64>>,
        provenance: Option<StreamKey>,
    ) -> Result<Self> {
        if let Some(p) = paths.iter().find(|p| p.len() != grid.len()) {
            return Err(Error::invalid(format!(
                "ensemble path has {} values for {} nodes",
                p.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid,
            paths,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Cross-section of all paths at node `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.paths.iter().map(|p| p[j]).collect()
    }

    pub fn at(&self, t: f64) -> Result<Vec<f64>> {
        Ok(self.column(self.grid.index_of(t)?))
    }
}

/// A grid function with values in the truncated dual; states stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualPath {
    grid: TimeGrid,
    basis: BasisSpec,
    coeffs: Vec<f64>,
}

impl DualPath {
    pub fn new(grid: TimeGrid, basis: BasisSpec, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != grid.len() * basis.n {
            return Err(Error::invalid(format!(
                "dual path needs {} coefficients, got {}",
                grid.len() * basis.n,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("dual path contains non-finite coefficients"));
        }
        Ok(Self {
            grid,
            basis,
            coeffs,
        })
    }

    pub fn zero(grid: TimeGrid, basis: BasisSpec) -> Self {
        Self {
            grid,
            basis,
            coeffs: vec![0.0; grid.len() * basis.n],
        }
    }

    /// Path `t ↦ f(t)` for a closure producing coefficient vectors.
    pub fn from_fn(grid: TimeGrid, basis: BasisSpec, f: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(grid.len() * basis.n);
        for j in 0..grid.len() {
            let c = f(grid.node(j));
            if c.len() != basis.n {
                return Err(Error::invalid("state has the wrong number of coefficients"));
            }
            coeffs.extend(c);
        }
        Self::new(grid, basis, coeffs)
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn basis(&self) -> BasisSpec {
        self.basis
    }

    pub fn state(&self, j: usize) -> &[f64] {
        &self.coeffs[j * self.basis.n..(j + 1) * self.basis.n]
    }

    pub(crate) fn state_mut(&mut self, j: usize) -> &mut [f64] {
        let n = self.basis.n;
        &mut self.coeffs[j * n..(j + 1) * n]
    }

    pub fn element(&self, j: usize) -> DualElement {
        DualElement::new(self.basis, self.state(j).to_vec()).expect("states are finite")
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.coeffs.chunks(self.basis.n)
    }

    /// `t ↦ ⟨x(t), φ⟩`.
    pub fn project(&self, phi: &TestFunction) -> Result<ScalarPath> {
        self.basis.ensure_same(&phi.basis())?;
        let values = self.states().map(|s| dot(s, phi.coeffs())).collect();
        ScalarPath::new(self.grid, values)
    }

    pub fn subsample(&self, factor: usize) -> Result<Self> {
        let grid = self.grid.coarsen(factor)?;
        let mut coeffs = Vec::with_capacity(grid.len() * self.basis.n);
        for j in 0..grid.len() {
            coeffs.extend_from_slice(self.state(j * factor));
        }
        Self::new(grid, self.basis, coeffs)
    }

    pub fn add(&self, other: &DualPath) -> Result<Self> {
        self.ensure_compatible(other)?;
        Ok(Self {
            grid: self.grid,
            basis: self.basis,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub(crate) fn ensure_compatible(&self, other: &DualPath) -> Result<()> {
        self.basis.ensure_same(&other.basis)?;
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualPathEnsemble {
    paths: Vec<DualPath>,
}

impl DualPathEnsemble {
    pub fn new(paths: Vec<DualPath>) -> Result<Self> {
        if let Some(first) = paths.first() {
            for p in &paths[1..] {
                first.ensure_compatible(p)?;
            }
        }
        Ok(Self { paths })
    }

    pub fn paths(&self) -> &[DualPath] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn grid(&self) -> Option<TimeGrid> {
        self.paths.first().map(|p| p.grid)
    }

    pub fn basis(&self) -> Option<BasisSpec> {
        self.paths.first().map(|p| p.basis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_nodes_and_lookup() {
        let g = TimeGrid::new(1.0, 1000).unwrap();
        assert_eq!(g.len(), 1001);
        assert_eq!(g.index_of(0.5).unwrap(), 500);
        assert_eq!(g.index_of(1.0).unwrap(), 1000);
        assert!(g.index_of(0.0005).is_err());
        assert!(g.index_of(1.5).is_err());
        assert_eq!(g.lag_for(0.1).unwrap(), 100);
        assert!(g.lag_for(0.0).is_err());
        assert!(TimeGrid::new(0.0, 3).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
    }

    #[test]
    fn lag_is_non_strict() {
        let g = TimeGrid::new(1.0, 20).unwrap();
        assert_eq!(g.lag_for(0.1).unwrap(), 2);
        assert_eq!(g.lag_for(0.099).unwrap(), 1);
    }

    #[test]
    fn subsample_keeps_coarse_nodes() {
        let g = TimeGrid::new(1.0, 8).unwrap();
        let spec = BasisSpec::new(2).unwrap();
        let p = DualPath::from_fn(g, spec, |t| vec![t, -t]).unwrap();
        let s = p.subsample(4).unwrap();
        assert_eq!(s.grid().steps(), 2);
        assert_eq!(s.state(1), &[0.5, -0.5]);
        assert!(p.subsample(3).is_err());
    }
}
