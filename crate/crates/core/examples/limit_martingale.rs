//! Samples the Gaussian limit M^0 jointly for two test functions and compares
//! the empirical covariance with A(t; phi, psi).

use nucleartight::hermite::{BasisSpec, TestFunction};
use nucleartight::martingale::{cross_covariance, limit_variance, simulate_limit};
use nucleartight::paths::TimeGrid;
use nucleartight::stats;

fn main() -> nucleartight::Result<()> {
    let spec = BasisSpec::new(16)?;
    let grid = TimeGrid::new(1.0, 100)?;
    let phi = TestFunction::hermite(spec, 0);
    let psi = TestFunction::hermite(spec, 0).combine(0.5, &TestFunction::hermite(spec, 1), 1.0)?;
    let ens = simulate_limit(&[phi.clone(), psi.clone()], grid, 4000, 11)?;
    for t in [0.25, 1.0] {
        let (a, b) = (ens[0].at(t)?, ens[1].at(t)?);
        let emp = stats::correlation(&a, &b) * (stats::variance(&a) * stats::variance(&b)).sqrt();
        println!(
            "t={t}: Var M0(phi) {:.5} vs A {:.5}; Cov {:.5} vs A(phi,psi) {:.5}",
            stats::variance(&a),
            limit_variance(&phi, t)?,
            emp,
            cross_covariance(&phi, &psi, t)?
        );
    }
    Ok(())
}
