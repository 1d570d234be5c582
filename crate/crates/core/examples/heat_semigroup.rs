//! Applies the heat semigroup E(t) = exp(tL) to h_0 and compares with the
//! exact Gaussian convolution.

use nucleartight::hermite::{heat_flow_h0, heat_matrix, BasisSpec, HermiteBasis, TestFunction};

fn main() -> nucleartight::Result<()> {
    let spec = BasisSpec::new(96)?;
    let basis = HermiteBasis::new(spec);
    let h0 = TestFunction::hermite(spec, 0);
    println!(
        "{:>6} {:>14} {:>14} {:>10}",
        "t", "<E(t)h0,h0>", "(1+t)^-1/2", "L2 err"
    );
    for t in [0.0, 0.1, 0.5, 1.0, 2.0] {
        let evolved = h0.apply(&heat_matrix(t, spec)?);
        let oracle = basis.project(|x| heat_flow_h0(t, x))?;
        let err = evolved
            .coeffs()
            .iter()
            .zip(oracle.coeffs())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        println!(
            "{t:>6.2} {:>14.10} {:>14.10} {err:>10.2e}",
            evolved.coeffs()[0],
            (1.0 + t).powf(-0.5)
        );
    }
    let lhs = heat_matrix(0.3, spec)? * heat_matrix(0.4, spec)?;
    let gap = (lhs - heat_matrix(0.7, spec)?).abs().max();
    println!("semigroup law |E(0.3)E(0.4) - E(0.7)| = {gap:.2e}");
    Ok(())
}
