//! The two-sample statistics: KS on scalars and energy distance on vectors.

use nucleartight::diagnostics::{energy_distance, ks_two_sample};
use nucleartight::rng::{Purpose, StreamKey};
use rand_distr::{Distribution, StandardNormal};

fn gaussian(seed: u64, m: usize, dim: usize, shift: f64) -> Vec<Vec<f64>> {
    let mut rng = StreamKey::new(seed, Purpose::Calibration, 0).rng();
    (0..m)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z + shift
                })
                .collect()
        })
        .collect()
}

fn main() -> nucleartight::Result<()> {
    let a = gaussian(1, 1000, 2, 0.0);
    for shift in [0.0, 0.1, 0.3] {
        let b = gaussian(2, 1000, 2, shift);
        let first = |s: &[Vec<f64>]| s.iter().map(|v| v[0]).collect::<Vec<_>>();
        let ks = ks_two_sample(&first(&a), &first(&b))?;
        let e = energy_distance(&a, &b)?;
        println!(
            "shift {shift}: KS {:.4} (5% crit {:.4}, p {:.3}); energy {:.4} +- {:.4}",
            ks.statistic, ks.critical_05, ks.p_value, e.statistic, e.std_error
        );
    }
    Ok(())
}
