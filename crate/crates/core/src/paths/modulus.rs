//! Grid moduli of continuity and compact-containment diagnostics.
//!
//! All suprema are taken over grid nodes only, with the non-strict window
//! `|t_i - t_j| <= δ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{DualPath, DualPathEnsemble};
use crate::error::{Error, Result};
use crate::hermite::{weighted_norm, SeminormIndex, TestFunction};
use crate::stats::quantile_sorted;

/// `w_x(δ, φ)`: largest `|⟨x(t_i) − x(t_j), φ⟩|` over `|t_i − t_j| ≤ δ`.
pub fn modulus_testfn(x: &DualPath, delta: f64, phi: &TestFunction) -> Result<f64> {
    let lag = x.grid().lag_for(delta)?;
    let values = x.project(phi)?.values;
    Ok(scalar_lag_maxima(&values, lag)
        .into_iter()
        .fold(0.0, f64::max))
}

/// `w_x(δ, q)` with `q' = p'_r`.
pub fn modulus_dual(x: &DualPath, delta: f64, r: SeminormIndex) -> Result<f64> {
    let lag = x.grid().lag_for(delta)?;
    Ok(dual_lag_maxima(x, r, lag).into_iter().fold(0.0, f64::max))
}

/// `max_j p'_r(x(t_j))`.
pub fn sup_dual_norm(x: &DualPath, r: SeminormIndex) -> f64 {
    x.states()
        .map(|s| weighted_norm(s, -r.value()))
        .fold(0.0, f64::max)
}

/// Moduli for several windows at once; `deltas` need not be sorted.
pub fn modulus_dual_curve(x: &DualPath, deltas: &[f64], r: SeminormIndex) -> Result<Vec<f64>> {
    let lags = deltas
        .iter()
        .map(|d| x.grid().lag_for(*d))
        .collect::<Result<Vec<_>>>()?;
    let max_lag = lags.iter().copied().max().unwrap_or(0);
    let running = running_max(dual_lag_maxima(x, r, max_lag));
    Ok(lags
        .iter()
        .map(|&l| if l == 0 { 0.0 } else { running[l - 1] })
        .collect())
}

fn running_max(v: Vec<f64>) -> Vec<f64> {
    let mut acc = 0.0f64;
    v.into_iter()
        .map(|x| {
            acc = acc.max(x);
            acc
        })
        .collect()
}

/// Entry `l-1` holds `max_i |v_{i+l} − v_i|`.
fn scalar_lag_maxima(values: &[f64], max_lag: usize) -> Vec<f64> {
    (1..=max_lag)
        .map(|l| {
            values
                .windows(l + 1)
                .map(|w| (w[l] - w[0]).abs())
                .fold(0.0, f64::max)
        })
        .collect()
}

fn dual_lag_maxima(x: &DualPath, r: SeminormIndex, max_lag: usize) -> Vec<f64> {
    let n = x.basis().n;
    let weights: Vec<f64> = (0..n).map(|k| 1.0 / r.weight(k)).collect();
    let scaled: Vec<Vec<f64>> = x
        .states()
        .map(|s| s.iter().zip(&weights).map(|(c, w)| c * w).collect())
        .collect();
    (1..=max_lag)
        .map(|l| {
            let mut best = 0.0f64;
            for i in 0..scaled.len().saturating_sub(l) {
                let (a, b) = (&scaled[i], &scaled[i + l]);
                let d2: f64 = a.iter().zip(b).map(|(u, v)| (v - u) * (v - u)).sum();
                best = best.max(d2);
            }
            best.sqrt()
        })
        .collect()
}

/// Quantiles of a per-path statistic across an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileSummary {
    pub median: f64,
    pub q90: f64,
    pub q99: f64,
    pub max: f64,
}

impl QuantileSummary {
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Self {
            median: quantile_sorted(&v, 0.5),
            q90: quantile_sorted(&v, 0.9),
            q99: quantile_sorted(&v, 0.99),
            max: v.last().copied().unwrap_or(0.0),
        }
    }
}

/// Empirical counterpart of the two compact-containment conditions: paths
/// stay in a dual-norm ball, and their moduli shrink uniformly as `δ → 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub r: f64,
    pub paths: usize,
    pub levels: Vec<f64>,
    /// `P̂(sup_t p'_r(x(t)) > C)` for each level `C`.
    pub exceedance: Vec<f64>,
    pub sup_norm: QuantileSummary,
    pub deltas: Vec<f64>,
    pub modulus: Vec<QuantileSummary>,
}

pub fn compact_containment_report(
    ensemble: &DualPathEnsemble,
    r: SeminormIndex,
    levels: &[f64],
    deltas: &[f64],
) -> Result<ContainmentReport> {
    if ensemble.is_empty() {
        return Err(Error::invalid(
            "compact-containment report needs a nonempty ensemble",
        ));
    }
    let per_path: Vec<PathTightness> = ensemble
        .paths()
        .par_iter()
        .map(|p| path_tightness(p, r, deltas))
        .collect::<Result<_>>()?;
    containment_from_stats(r, levels, deltas, &per_path)
}

/// Per-path ingredients of a [`ContainmentReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct PathTightness {
    pub sup_norm: f64,
    /// `w_x(δ, p_r)` for each requested window.
    pub modulus: Vec<f64>,
}

pub fn path_tightness(x: &DualPath, r: SeminormIndex, deltas: &[f64]) -> Result<PathTightness> {
    Ok(PathTightness {
        sup_norm: sup_dual_norm(x, r),
        modulus: modulus_dual_curve(x, deltas, r)?,
    })
}

/// Aggregates per-path statistics computed elsewhere (e.g. inside a Monte
/// Carlo loop that never keeps the paths).
pub fn containment_from_stats(
    r: SeminormIndex,
    levels: &[f64],
    deltas: &[f64],
    per_path: &[PathTightness],
) -> Result<ContainmentReport> {
    if per_path.is_empty() {
        return Err(Error::invalid(
            "compact-containment report needs a nonempty ensemble",
        ));
    }
    if per_path.iter().any(|p| p.modulus.len() != deltas.len()) {
        return Err(Error::invalid(
            "per-path modulus curves do not match the window grid",
        ));
    }
    let m = per_path.len() as f64;
    let sups: Vec<f64> = per_path.iter().map(|p| p.sup_norm).collect();
    let exceedance = levels
        .iter()
        .map(|c| sups.iter().filter(|s| *s > c).count() as f64 / m)
        .collect();
    let modulus = (0..deltas.len())
        .map(|i| {
            let col: Vec<f64> = per_path.iter().map(|p| p.modulus[i]).collect();
            QuantileSummary::of(&col)
        })
        .collect();
    Ok(ContainmentReport {
        r: r.value(),
        paths: per_path.len(),
        levels: levels.to_vec(),
        exceedance,
        sup_norm: QuantileSummary::of(&sups),
        deltas: deltas.to_vec(),
        modulus,
    })
}

/// Scalar version of the modulus used on `t ↦ ⟨x(t), φ⟩` paths.
pub fn scalar_modulus(values: &[f64], lag: usize) -> f64 {
    scalar_lag_maxima(values, lag)
        .into_iter()
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::BasisSpec;
    use crate::paths::TimeGrid;

    fn r(v: f64) -> SeminormIndex {
        SeminormIndex::new(v).unwrap()
    }

    #[test]
    fn constant_path_has_zero_modulus() {
        let g = TimeGrid::new(1.0, 10).unwrap();
        let spec = BasisSpec::new(3).unwrap();
        let p = DualPath::from_fn(g, spec, |_| vec![1.0, 2.0, -3.0]).unwrap();
        let phi = TestFunction::new(spec, vec![0.3, -1.0, 2.0]).unwrap();
        assert_eq!(modulus_testfn(&p, 0.5, &phi).unwrap(), 0.0);
        assert_eq!(modulus_dual(&p, 0.5, r(0.0)).unwrap(), 0.0);
        assert!(modulus_dual(&p, 0.0, r(0.0)).is_err());
        assert!(modulus_dual(&p, -1.0, r(0.0)).is_err());
    }

    #[test]
    fn linear_path_modulus_equals_window() {
        let g = TimeGrid::new(1.0, 20).unwrap();
        let spec = BasisSpec::new(2).unwrap();
        let p = DualPath::from_fn(g, spec, |t| vec![t, 0.0]).unwrap();
        let phi = TestFunction::hermite(spec, 0);
        assert!((modulus_testfn(&p, 0.1, &phi).unwrap() - 0.1).abs() < 1e-15);
        assert!((modulus_dual(&p, 0.25, r(1.7)).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sup_norm_of_sine_path() {
        let g = TimeGrid::new(1.0, 50).unwrap();
        let spec = BasisSpec::new(3).unwrap();
        let p = DualPath::from_fn(g, spec, |t| {
            vec![0.0, (2.0 * std::f64::consts::PI * t).sin(), 0.0]
        })
        .unwrap();
        let expect = (0..=50)
            .map(|j| (2.0 * std::f64::consts::PI * j as f64 / 50.0).sin().abs())
            .fold(0.0, f64::max)
            / 3f64.sqrt();
        assert!((sup_dual_norm(&p, r(0.5)) - expect).abs() < 1e-15);
        assert_eq!(sup_dual_norm(&DualPath::zero(g, spec), r(0.5)), 0.0);
    }

    #[test]
    fn curve_matches_pointwise_moduli() {
        let g = TimeGrid::new(1.0, 40).unwrap();
        let spec = BasisSpec::new(4).unwrap();
        let p = DualPath::from_fn(g, spec, |t| {
            vec![
                (7.0 * t).sin(),
                t * t,
                (3.0 * t).cos(),
                (t * 11.0).sin() * 0.2,
            ]
        })
        .unwrap();
        let deltas = [0.3, 0.025, 0.1, 1.0];
        let curve = modulus_dual_curve(&p, &deltas, r(0.5)).unwrap();
        for (d, w) in deltas.iter().zip(&curve) {
            assert_eq!(*w, modulus_dual(&p, *d, r(0.5)).unwrap());
        }
    }

    #[test]
    fn empty_ensemble_rejected() {
        let e = DualPathEnsemble::new(vec![]).unwrap();
        assert!(compact_containment_report(&e, r(1.0), &[1.0], &[0.1]).is_err());
    }

    #[test]
    fn single_path_exceedance() {
        let g = TimeGrid::new(1.0, 4).unwrap();
        let spec = BasisSpec::new(2).unwrap();
        let p = DualPath::from_fn(g, spec, |t| vec![5.0 * t, 0.0]).unwrap();
        let e = DualPathEnsemble::new(vec![p]).unwrap();
        let rep = compact_containment_report(&e, r(0.0), &[1.0, 10.0], &[0.25]).unwrap();
        assert_eq!(rep.exceedance, vec![1.0, 0.0]);
        assert_eq!(rep.sup_norm.max, 5.0);
    }
}
