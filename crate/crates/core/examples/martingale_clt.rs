//! Simulates particle martingales M^n(phi), checks the quadratic variation
//! against A(t, phi), and tests the rescaled values for normality.

use nucleartight::diagnostics::{ks_one_sample, standard_normal_cdf};
use nucleartight::hermite::{BasisSpec, TestFunction};
use nucleartight::martingale::{limit_variance, run_martingale_reps};
use nucleartight::paths::TimeGrid;
use nucleartight::stats;

fn main() -> nucleartight::Result<()> {
    let spec = BasisSpec::new(8)?;
    let grid = TimeGrid::new(1.0, 500)?;
    let phi = TestFunction::hermite(spec, 0).combine(1.0, &TestFunction::hermite(spec, 2), 1.0)?;
    let a = limit_variance(&phi, 1.0)?;
    println!("A(1, h0+h2) = {a:.6}");
    for n in [10, 50, 250] {
        let reps = run_martingale_reps(
            spec,
            grid,
            n,
            std::slice::from_ref(&phi),
            &[(0, 1.0)],
            1000,
            7,
            None,
        )?;
        let m: Vec<f64> = reps.iter().map(|r| r.martingale[0]).collect();
        let qv: Vec<f64> = reps.iter().map(|r| r.quadratic_variation[0]).collect();
        let z: Vec<f64> = m.iter().map(|v| v / a.sqrt()).collect();
        let ks = ks_one_sample(&z, standard_normal_cdf)?;
        println!(
            "n={n:>4}: mean QV {:.5} (sd {:.5}), Var M {:.5}, KS {:.4} (p {:.3})",
            stats::mean(&qv),
            stats::variance(&qv).sqrt(),
            stats::variance(&m),
            ks.statistic,
            ks.p_value
        );
    }
    Ok(())
}
