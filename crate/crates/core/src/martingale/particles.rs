use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hermite::{derivative_op, BasisSpec, TestFunction};
use crate::paths::{DualPath, ScalarPath, TimeGrid};
use crate::rng::StreamKey;

/// `n` independent one-dimensional Brownian motions on a grid, stored as
/// increments (step-major: row `j` holds `B^i_{t_{j+1}} − B^i_{t_j}` for all `i`).
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    n: usize,
    grid: TimeGrid,
    increments: Vec<f64>,
    key: StreamKey,
}

/// Draws the ensemble from the stream `key`. Identical keys give identical bits.
pub fn simulate_particles(n: usize, grid: TimeGrid, key: StreamKey) -> Result<ParticleEnsemble> {
    if n == 0 {
        return Err(Error::invalid("particle count must be >= 1"));
    }
    let mut rng = key.rng();
    let sd = grid.dt().sqrt();
    let increments = (0..n * grid.steps())
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sd * z
        })
        .collect();
    Ok(ParticleEnsemble {
        n,
        grid,
        increments,
        key,
    })
}

impl ParticleEnsemble {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn key(&self) -> StreamKey {
        self.key
    }

    pub fn increments(&self, step: usize) -> &[f64] {
        &self.increments[step * self.n..(step + 1) * self.n]
    }

    /// `B^i_{t_j}` for every particle.
    pub fn positions(&self, j: usize) -> Vec<f64> {
        let mut pos = vec![0.0; self.n];
        for step in 0..j {
            for (p, d) in pos.iter_mut().zip(self.increments(step)) {
                *p += d;
            }
        }
        pos
    }

    /// Trajectory of particle `i` at every node.
    pub fn trajectory(&self, i: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.grid.len());
        let mut b = 0.0;
        out.push(b);
        for step in 0..self.grid.steps() {
            b += self.increments(step)[i];
            out.push(b);
        }
        out
    }

    /// The same Brownian realization observed on every `factor`-th node.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        let grid = self.grid.coarsen(factor)?;
        let mut increments = vec![0.0; self.n * grid.steps()];
        for step in 0..self.grid.steps() {
            let row = &mut increments[(step / factor) * self.n..(step / factor + 1) * self.n];
            for (acc, d) in row.iter_mut().zip(self.increments(step)) {
                *acc += d;
            }
        }
        Ok(Self {
            n: self.n,
            grid,
            increments,
            key: self.key,
        })
    }
}

/// Recurrence constants for the Hermite functions, precomputed once per pass.
struct HermiteRecurrence {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl HermiteRecurrence {
    fn new(n: usize) -> Self {
        let a = (0..n).map(|k| (2.0 / (k as f64 + 1.0)).sqrt()).collect();
        let b = (0..n)
            .map(|k| (k as f64 / (k as f64 + 1.0)).sqrt())
            .collect();
        Self { a, b }
    }

    #[inline]
    fn eval(&self, x: f64, out: &mut [f64]) {
        let n = out.len();
        out[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
        if n > 1 {
            out[1] = std::f64::consts::SQRT_2 * x * out[0];
        }
        for k in 1..n.saturating_sub(1) {
            out[k + 1] = self.a[k] * x * out[k] - self.b[k] * out[k - 1];
        }
    }
}

/// Left-point Itô sums driven by one particle ensemble.
#[derive(Debug, Clone)]
pub struct ItoSums {
    /// `M^n(φ)` for each requested `φ`.
    pub martingales: Vec<ScalarPath>,
    /// `⟨M^n(φ)⟩` for each requested `φ`.
    pub quadratic_variations: Vec<ScalarPath>,
    /// Coordinates `M^n(h_k)`, `k < N`, when requested.
    pub dual: Option<DualPath>,
}

/// One pass over the particles computing, for every `φ` in `fns`,
/// `M_{t_{j+1}} = M_{t_j} + n^{-1/2} Σ_i φ'(B^i_{t_j}) ΔB^i_j` and
/// `⟨M⟩_{t_{j+1}} = ⟨M⟩_{t_j} + n^{-1} Σ_i φ'(B^i_{t_j})² dt`, with `φ'` taken
/// through the truncated derivative matrix.
pub fn ito_sums(
    particles: &ParticleEnsemble,
    basis: BasisSpec,
    fns: &[TestFunction],
    with_dual: bool,
) -> Result<ItoSums> {
    for f in fns {
        basis.ensure_same(&f.basis())?;
    }
    let d = derivative_op(basis);
    let grads: Vec<Vec<f64>> = fns.iter().map(|f| f.apply(&d).coeffs().to_vec()).collect();
    let dt_t: DMatrix<f64> = d.transpose();

    let nb = basis.n;
    let steps = particles.grid.steps();
    let n = particles.n;
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let qv_scale = particles.grid.dt() / n as f64;
    let rec = HermiteRecurrence::new(nb);

    let mut m_paths = vec![vec![0.0; steps + 1]; fns.len()];
    let mut qv_paths = vec![vec![0.0; steps + 1]; fns.len()];
    let mut dual = with_dual.then(|| DualPath::zero(particles.grid, basis));

    let mut pos = vec![0.0; n];
    let mut h = vec![0.0; nb];
    let mut m_acc = vec![0.0; fns.len()];
    let mut qv_acc = vec![0.0; fns.len()];
    let mut v = vec![0.0; nb];

    for step in 0..steps {
        m_acc.iter_mut().for_each(|x| *x = 0.0);
        qv_acc.iter_mut().for_each(|x| *x = 0.0);
        v.iter_mut().for_each(|x| *x = 0.0);
        for (p, db) in pos.iter_mut().zip(particles.increments(step)) {
            rec.eval(*p, &mut h);
            for ((g, ma), qa) in grads.iter().zip(m_acc.iter_mut()).zip(qv_acc.iter_mut()) {
                let slope: f64 = g.iter().zip(&h).map(|(a, b)| a * b).sum();
                *ma += slope * db;
                *qa += slope * slope;
            }
            if with_dual {
                for (acc, hk) in v.iter_mut().zip(&h) {
                    *acc += hk * db;
                }
            }
            *p += db;
        }
        for f in 0..fns.len() {
            m_paths[f][step + 1] = m_paths[f][step] + inv_sqrt_n * m_acc[f];
            qv_paths[f][step + 1] = qv_paths[f][step] + qv_scale * qv_acc[f];
        }
        if let Some(path) = dual.as_mut() {
            let prev = path.state(step).to_vec();
            let next = path.state_mut(step + 1);
            for k in 0..nb {
                let mut inc = 0.0;
                for l in 0..nb {
                    inc += dt_t[(k, l)] * v[l];
                }
                next[k] = prev[k] + inv_sqrt_n * inc;
            }
        }
    }

    let grid = particles.grid;
    Ok(ItoSums {
        martingales: m_paths
            .into_iter()
            .map(|v| ScalarPath::new(grid, v))
            .collect::<Result<_>>()?,
        quadratic_variations: qv_paths
            .into_iter()
            .map(|v| ScalarPath::new(grid, v))
            .collect::<Result<_>>()?,
        dual,
    })
}

/// `t ↦ M^n_t(φ)`.
pub fn mn_scalar_path(phi: &TestFunction, particles: &ParticleEnsemble) -> Result<ScalarPath> {
    let mut sums = ito_sums(particles, phi.basis(), std::slice::from_ref(phi), false)?;
    Ok(sums.martingales.remove(0))
}

/// `t ↦ ⟨M^n(φ)⟩_t`.
pub fn quadratic_variation_path(
    phi: &TestFunction,
    particles: &ParticleEnsemble,
) -> Result<ScalarPath> {
    let mut sums = ito_sums(particles, phi.basis(), std::slice::from_ref(phi), false)?;
    Ok(sums.quadratic_variations.remove(0))
}
