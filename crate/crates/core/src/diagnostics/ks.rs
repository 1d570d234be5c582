//! Kolmogorov–Smirnov statistics with asymptotic critical values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `c(0.05)` of the asymptotic Kolmogorov distribution.
pub const KS_C_05: f64 = 1.358;
/// `c(0.01)` of the asymptotic Kolmogorov distribution.
pub const KS_C_01: f64 = 1.628;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsOutcome {
    pub statistic: f64,
    pub critical_05: f64,
    pub critical_01: f64,
    /// Asymptotic p-value (Stephens' small-sample correction).
    pub p_value: f64,
}

impl KsOutcome {
    fn new(statistic: f64, effective_n: f64) -> Self {
        let root = effective_n.sqrt();
        Self {
            statistic,
            critical_05: KS_C_05 / root,
            critical_01: KS_C_01 / root,
            p_value: kolmogorov_survival((root + 0.12 + 0.11 / root) * statistic),
        }
    }

    pub fn rejects_at_01(&self) -> bool {
        self.statistic >= self.critical_01
    }

    pub fn rejects_at_05(&self) -> bool {
        self.statistic >= self.critical_05
    }
}

/// `P(K > λ)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // P(K <= λ) = √(2π)/λ Σ_{k≥1} exp(-(2k-1)² π² / (8λ²))
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let mut cdf = 0.0;
        for k in 1..=20 {
            let odd = (2 * k - 1) as f64;
            cdf += (-odd * odd * pi2 / (8.0 * lambda * lambda)).exp();
        }
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::invalid("KS sample contains NaN"));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Two-sample statistic `sup |F_a − F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsOutcome> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::invalid("KS samples need at least two points each"));
    }
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(KsOutcome::new(d, na * nb / (na + nb)))
}

/// One-sample statistic against a continuous CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsOutcome> {
    if sample.len() < 2 {
        return Err(Error::invalid("KS sample needs at least two points"));
    }
    let s = sorted(sample)?;
    let n = s.len() as f64;
    let d = s
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    Ok(KsOutcome::new(d, n))
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_give_zero() {
        let a = [0.3, -1.0, 2.0, 0.3, 5.0];
        assert_eq!(ks_two_sample(&a, &a).unwrap().statistic, 0.0);
    }

    #[test]
    fn disjoint_samples_give_one() {
        let a = [-3.0, -2.0, -0.5];
        let b = [0.1, 4.0, 9.0, 1.0];
        assert_eq!(ks_two_sample(&a, &b).unwrap().statistic, 1.0);
    }

    #[test]
    fn undersized_samples_rejected() {
        assert!(ks_two_sample(&[1.0], &[1.0, 2.0]).is_err());
        assert!(ks_one_sample(&[1.0], standard_normal_cdf).is_err());
    }

    #[test]
    fn critical_values() {
        let o = ks_two_sample(&[0.0; 2000], &[0.0; 2000]).unwrap();
        assert!((o.critical_01 - 1.628 * (4000.0f64 / 4e6).sqrt()).abs() < 1e-15);
        let one = ks_one_sample(&(0..2000).map(|i| i as f64).collect::<Vec<_>>(), |_| 0.5).unwrap();
        assert!((one.critical_01 - 1.628 / 2000f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn survival_function_reference_points() {
        // standard tabulated values of the Kolmogorov distribution
        assert!((kolmogorov_survival(1.358) - 0.05).abs() < 5e-4);
        assert!((kolmogorov_survival(1.628) - 0.01).abs() < 5e-4);
        assert!((kolmogorov_survival(0.5) - 0.9639).abs() < 1e-3);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
        let (lo, hi) = (
            kolmogorov_survival(0.999_999),
            kolmogorov_survival(1.000_001),
        );
        assert!((lo - hi).abs() < 1e-5);
    }

    #[test]
    fn one_sample_uniform_grid_is_small() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let o = ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((o.statistic - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn normal_cdf_values() {
        assert!((standard_normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((standard_normal_cdf(1.959963984540054) - 0.975).abs() < 1e-9);
    }
}
