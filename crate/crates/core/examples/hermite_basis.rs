//! Builds a truncated Hermite basis, projects a test function, and evaluates
//! the seminorm ladder and Hilbert-Schmidt inclusion norms.

use nucleartight::hermite::{
    derivative_op, hs_norm, hs_tail_bound, seminorm, write_matrix_csv, BasisSpec, HermiteBasis,
    SeminormFamily, SeminormIndex,
};

fn main() -> nucleartight::Result<()> {
    let spec = BasisSpec::new(32)?;
    let basis = HermiteBasis::new(spec);

    let gram = basis.gram_matrix();
    let err = (gram - nalgebra::DMatrix::<f64>::identity(32, 32))
        .abs()
        .max();
    println!("basis N={} Q={}: max |G - I| = {err:.2e}", spec.n, spec.q);

    // A Schwartz function and its coefficients.
    let phi = basis.project(|x| (-x * x).exp() * (1.0 + x))?;
    println!(
        "phi(0.3) = {:.6}, series = {:.6}",
        (-0.09f64).exp() * 1.3,
        phi.evaluate(0.3)
    );
    for r in [0.0, 1.0, 2.0] {
        println!("p_{r}(phi) = {:.6}", seminorm(&phi, SeminormIndex::new(r)?));
    }

    let family = SeminormFamily::new(vec![
        SeminormIndex::new(0.0)?,
        SeminormIndex::new(1.0)?,
        SeminormIndex::new(2.0)?,
    ])?;
    for (i, hs) in family.inclusion_norms(spec.n).iter().enumerate() {
        println!(
            "inclusion {i}: HS norm {:.6} (converges: {})",
            hs.value, hs.converges
        );
    }
    let (r, s) = (SeminormIndex::new(1.0)?, SeminormIndex::new(2.0)?);
    let hs = hs_norm(r, s, 10_000)?;
    println!(
        "||i_(1,2)||^2 at N=1e4 = {:.8}, pi^2/8 = {:.8}, tail bound {:.2e}",
        hs.squared(),
        std::f64::consts::PI.powi(2) / 8.0,
        hs_tail_bound(r, s, 10_000)
    );

    let mut csv = Vec::new();
    write_matrix_csv(&derivative_op(BasisSpec::new(3)?), &mut csv)?;
    print!(
        "derivative matrix (N=3):\n{}",
        String::from_utf8_lossy(&csv)
    );
    Ok(())
}
