//! Gauss–Hermite and Gauss–Legendre rules.
//!
//! Hermite nodes come from the Golub–Welsch eigenvalue problem and are then
//! polished by Newton steps on the orthonormal Hermite *function* `h_Q`, which
//! never overflows. Weights are produced in the "function" form
//! `W_i = w_i e^{x_i^2} = 1 / (Q h_{Q-1}(x_i)^2)`, so integrals of products of
//! Hermite functions need no explicit Gaussian factor.

use nalgebra::{DMatrix, SymmetricEigen};

use super::basis::hermite_functions;

#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    /// Weights for `∫ f(x) e^{-x^2} dx ≈ Σ w_i f(x_i)`.
    weights: Vec<f64>,
    /// Weights for `∫ g(x) dx ≈ Σ W_i g(x_i)` when `g` carries its own Gaussian decay.
    function_weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Hermite order must be positive");
        let mut jacobi = DMatrix::<f64>::zeros(order, order);
        for k in 1..order {
            let b = (k as f64 / 2.0).sqrt();
            jacobi[(k, k - 1)] = b;
            jacobi[(k - 1, k)] = b;
        }
        let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let mut buf = vec![0.0; order + 1];
        let q = order as f64;
        let mut function_weights = Vec::with_capacity(order);
        for x in nodes.iter_mut() {
            for _ in 0..3 {
                hermite_functions(*x, &mut buf);
                let h_q = buf[order];
                let dh = (2.0 * q).sqrt() * buf[order - 1] - *x * h_q;
                if dh != 0.0 {
                    *x -= h_q / dh;
                }
            }
            hermite_functions(*x, &mut buf);
            let h_prev = buf[order - 1];
            function_weights.push(1.0 / (q * h_prev * h_prev));
        }
        // Nodes are symmetric about zero; enforce it exactly.
        for i in 0..order / 2 {
            let j = order - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            let w = 0.5 * (function_weights[i] + function_weights[j]);
            nodes[i] = -x;
            nodes[j] = x;
            function_weights[i] = w;
            function_weights[j] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        let weights = nodes
            .iter()
            .zip(&function_weights)
            .map(|(x, w)| w * (-x * x).exp())
            .collect();
        Self {
            nodes,
            weights,
            function_weights,
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn function_weights(&self) -> &[f64] {
        &self.function_weights
    }

    /// `E[f(Z)]` for `Z ~ Normal(0, variance)`.
    pub fn gaussian_expectation(&self, variance: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        if variance == 0.0 {
            return f(0.0);
        }
        let scale = (2.0 * variance).sqrt();
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(scale * x))
            .sum();
        sum / std::f64::consts::PI.sqrt()
    }
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Composite rule: `panels` equal subintervals of `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
        let width = (b - a) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let lo = a + p as f64 * width;
            let mid = lo + 0.5 * width;
            let half = 0.5 * width;
            let mut acc = 0.0;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                acc += w * f(mid + half * x);
            }
            total += acc * half;
        }
        total
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, w * half))
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_weights_integrate_gaussian_moments() {
        let gh = GaussHermite::new(20);
        let pi_sqrt = std::f64::consts::PI.sqrt();
        let m0: f64 = gh.weights().iter().sum();
        let m2: f64 = gh
            .nodes()
            .iter()
            .zip(gh.weights())
            .map(|(x, w)| w * x * x)
            .sum();
        let m4: f64 = gh
            .nodes()
            .iter()
            .zip(gh.weights())
            .map(|(x, w)| w * x.powi(4))
            .sum();
        assert!((m0 - pi_sqrt).abs() < 1e-13);
        assert!((m2 - pi_sqrt / 2.0).abs() < 1e-13);
        assert!((m4 - 3.0 * pi_sqrt / 4.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_expectation_matches_moments() {
        let gh = GaussHermite::new(16);
        let v = 0.7;
        assert!((gh.gaussian_expectation(v, |x| x * x) - v).abs() < 1e-13);
        assert!((gh.gaussian_expectation(v, |x| x.powi(4)) - 3.0 * v * v).abs() < 1e-12);
        assert_eq!(gh.gaussian_expectation(0.0, |x| x + 2.0), 2.0);
    }

    #[test]
    fn large_order_nodes_are_sorted_and_symmetric() {
        let gh = GaussHermite::new(256);
        assert!(gh.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(gh
            .function_weights()
            .iter()
            .all(|w| w.is_finite() && *w > 0.0));
        assert_eq!(gh.nodes()[0], -gh.nodes()[255]);
    }

    #[test]
    fn legendre_composite_rule_is_exact_for_polynomials() {
        let gl = GaussLegendre::new(5);
        let v = gl.integrate(0.0, 2.0, 3, |x| x.powi(9));
        assert!((v - 2f64.powi(10) / 10.0).abs() < 1e-10);
        let w: f64 = gl.mapped(-1.0, 3.0).map(|(_, w)| w).sum();
        assert!((w - 4.0).abs() < 1e-14);
    }
}
