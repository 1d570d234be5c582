//! Two-sample energy distance with U-statistic (off-diagonal) means.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyDistance {
    pub statistic: f64,
    /// Two-sample jackknife standard error of `statistic`.
    pub std_error: f64,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn row_sums(points: &[Vec<f64>], others: &[Vec<f64>]) -> Vec<f64> {
    points
        .par_iter()
        .map(|p| others.iter().map(|q| dist(p, q)).sum())
        .collect()
}

/// `2·mean‖x−y‖ − mean_{i≠i'}‖x−x'‖ − mean_{j≠j'}‖y−y'‖`.
pub fn energy_distance(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<EnergyDistance> {
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::invalid(
            "energy distance needs at least two points per sample",
        ));
    }
    let dim = x[0].len();
    if x.iter().chain(y).any(|p| p.len() != dim) {
        return Err(Error::invalid(
            "energy distance samples differ in dimension",
        ));
    }
    let (m, n) = (x.len() as f64, y.len() as f64);
    let rxy = row_sums(x, y);
    let ryx = row_sums(y, x);
    let rxx = row_sums(x, x);
    let ryy = row_sums(y, y);
    let sxy: f64 = rxy.iter().sum();
    let sxx: f64 = rxx.iter().sum();
    let syy: f64 = ryy.iter().sum();
    let statistic = 2.0 * sxy / (m * n) - sxx / (m * (m - 1.0)) - syy / (n * (n - 1.0));

    let std_error = if x.len() < 3 || y.len() < 3 {
        0.0
    } else {
        let loo_x: Vec<f64> = rxy
            .iter()
            .zip(&rxx)
            .map(|(a, b)| {
                2.0 * (sxy - a) / ((m - 1.0) * n)
                    - (sxx - 2.0 * b) / ((m - 1.0) * (m - 2.0))
                    - syy / (n * (n - 1.0))
            })
            .collect();
        let loo_y: Vec<f64> = ryx
            .iter()
            .zip(&ryy)
            .map(|(a, b)| {
                2.0 * (sxy - a) / (m * (n - 1.0))
                    - sxx / (m * (m - 1.0))
                    - (syy - 2.0 * b) / ((n - 1.0) * (n - 2.0))
            })
            .collect();
        (jackknife_part(&loo_x) + jackknife_part(&loo_y)).sqrt()
    };
    Ok(EnergyDistance {
        statistic,
        std_error,
    })
}

fn jackknife_part(loo: &[f64]) -> f64 {
    let k = loo.len() as f64;
    let mean = loo.iter().sum::<f64>() / k;
    (k - 1.0) / k * loo.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|x| vec![*x]).collect()
    }

    #[test]
    fn equal_multisets_are_within_noise() {
        let x = pts(&[0.1, -0.4, 1.3, 0.8, -2.0, 0.0]);
        let mut y = x.clone();
        y.reverse();
        let e = energy_distance(&x, &y).unwrap();
        assert!(e.statistic <= 2.0 * e.std_error);
    }

    #[test]
    fn permutation_invariance() {
        let x = vec![
            vec![0.0, 1.0],
            vec![2.0, -1.0],
            vec![0.5, 0.5],
            vec![-1.0, 3.0],
        ];
        let y = vec![vec![1.0, 1.0], vec![0.0, 0.0], vec![2.0, 2.0]];
        let a = energy_distance(&x, &y).unwrap();
        let mut xp = x.clone();
        xp.swap(0, 3);
        let mut yp = y.clone();
        yp.swap(1, 2);
        let b = energy_distance(&xp, &yp).unwrap();
        assert!((a.statistic - b.statistic).abs() < 1e-14);
    }

    #[test]
    fn matches_direct_double_sum() {
        let x = pts(&[0.0, 1.0, 3.0]);
        let y = pts(&[0.5, 2.0]);
        // cross sum 7.5 over 6 pairs; within-x ordered pairs sum 12 over 6; within-y 1.5
        let expect = 2.0 * 7.5 / 6.0 - 12.0 / 6.0 - 1.5;
        let e = energy_distance(&x, &y).unwrap();
        assert!((e.statistic - expect).abs() < 1e-14);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn errors() {
        assert!(energy_distance(&pts(&[1.0]), &pts(&[1.0, 2.0])).is_err());
        assert!(
            energy_distance(&[vec![1.0], vec![2.0]], &[vec![1.0, 0.0], vec![2.0, 0.0]]).is_err()
        );
    }
}
