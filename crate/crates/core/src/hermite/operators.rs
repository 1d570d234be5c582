use std::io::Write;

use nalgebra::DMatrix;

use super::basis::BasisSpec;
use super::expm::expm;
use crate::error::{Error, Result};

/// Matrix of `d/dx` on `span{h_0..h_{N-1}}`, from
/// `h_k' = √(k/2) h_{k-1} − √((k+1)/2) h_{k+1}` with the `h_N` term dropped.
pub fn derivative_op(basis: BasisSpec) -> DMatrix<f64> {
    let n = basis.n;
    let mut d = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        if k >= 1 {
            d[(k - 1, k)] = (k as f64 / 2.0).sqrt();
        }
        if k + 1 < n {
            d[(k + 1, k)] = -((k as f64 + 1.0) / 2.0).sqrt();
        }
    }
    d
}

/// `L = D²`, symmetric and negative semidefinite.
pub fn laplacian_op(basis: BasisSpec) -> DMatrix<f64> {
    let d = derivative_op(basis);
    &d * &d
}

/// `E(t) = exp(tL)`, symmetrized so that `E = Eᵀ` holds exactly.
pub fn heat_matrix(t: f64, basis: BasisSpec) -> Result<DMatrix<f64>> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!(
            "heat semigroup time must be >= 0, got {t}"
        )));
    }
    let n = basis.n;
    if t == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }
    let e = expm(&(laplacian_op(basis) * t));
    Ok((&e + e.transpose()) * 0.5)
}

/// `(e^{tΔ} h_0)(x)`: Gaussian convolution of `h_0` with the `N(0, 2t)` kernel,
/// `π^{-1/4} (1+2t)^{-1/2} exp(−x² / (2(1+2t)))`.
pub fn heat_flow_h0(t: f64, x: f64) -> f64 {
    let a = 1.0 + 2.0 * t;
    std::f64::consts::PI.powf(-0.25) * (-x * x / (2.0 * a)).exp() / a.sqrt()
}

/// Row-major CSV dump with header `i,j,value`.
pub fn write_matrix_csv(m: &DMatrix<f64>, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "i,j,value")?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            writeln!(out, "{i},{j},{}", m[(i, j)])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::basis::{hermite_functions, HermiteBasis, TestFunction};
    use nalgebra::SymmetricEigen;

    #[test]
    fn derivative_of_h0_against_finite_differences() {
        let spec = BasisSpec::new(8).unwrap();
        let d = derivative_op(spec);
        assert!((d[(1, 0)] + (0.5f64).sqrt()).abs() < 1e-16);
        assert!(d
            .column(0)
            .iter()
            .enumerate()
            .all(|(k, v)| k == 1 || *v == 0.0));
        // h0' = -x h0 = -(1/√2) h1
        let h = 1e-5;
        for &x in &[-1.3, 0.0, 0.4, 2.2] {
            let mut a = [0.0; 2];
            let mut b = [0.0; 2];
            hermite_functions(x + h, &mut a);
            hermite_functions(x - h, &mut b);
            let fd = (a[0] - b[0]) / (2.0 * h);
            let mut hx = [0.0; 2];
            hermite_functions(x, &mut hx);
            assert!((fd - d[(1, 0)] * hx[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn derivative_is_skew() {
        let d = derivative_op(BasisSpec::new(32).unwrap());
        assert_eq!(&d + d.transpose(), DMatrix::zeros(32, 32));
    }

    #[test]
    fn laplacian_symmetric_and_nonpositive() {
        let l = laplacian_op(BasisSpec::new(64).unwrap());
        assert_eq!(l, l.transpose());
        let eig = SymmetricEigen::new(l);
        assert!(eig.eigenvalues.max() <= 1e-10);
    }

    #[test]
    fn laplacian_matches_second_differences() {
        let spec = BasisSpec::new(64).unwrap();
        let basis = HermiteBasis::new(spec);
        let l = laplacian_op(spec);
        let phi = basis
            .project(|x| (1.0 + 0.5 * x - x * x) * (-x * x / 2.0).exp())
            .unwrap();
        let lphi = phi.apply(&l);
        let h = 1e-3;
        for &x in basis.nodes().iter().filter(|x| x.abs() < 4.0) {
            let fd = (phi.evaluate(x + h) - 2.0 * phi.evaluate(x) + phi.evaluate(x - h)) / (h * h);
            assert!((fd - lphi.evaluate(x)).abs() < 1e-4, "x = {x}");
        }
    }

    #[test]
    fn heat_matrix_basics() {
        let spec = BasisSpec::new(64).unwrap();
        assert_eq!(heat_matrix(0.0, spec).unwrap(), DMatrix::identity(64, 64));
        assert!(heat_matrix(-0.1, spec).is_err());
        let e = heat_matrix(0.7, spec).unwrap();
        assert_eq!(e, e.transpose());
        let eig = SymmetricEigen::new(e);
        assert!(eig
            .eigenvalues
            .iter()
            .all(|v| *v <= 1.0 + 1e-12 && *v > -1e-12));
    }

    #[test]
    fn semigroup_law() {
        let spec = BasisSpec::new(64).unwrap();
        let lhs = heat_matrix(0.3, spec).unwrap() * heat_matrix(0.2, spec).unwrap();
        let rhs = heat_matrix(0.5, spec).unwrap();
        assert!((lhs - rhs).abs().max() < 1e-10);
    }

    #[test]
    fn small_time_close_to_identity() {
        let spec = BasisSpec::new(32).unwrap();
        let e = heat_matrix(1e-9, spec).unwrap();
        assert!((e - DMatrix::identity(32, 32)).abs().max() < 1e-6);
    }

    #[test]
    fn heat_flow_of_h0_matches_convolution() {
        let spec = BasisSpec::new(128).unwrap();
        let basis = HermiteBasis::new(spec);
        let t = 0.5;
        let evolved = TestFunction::hermite(spec, 0).apply(&heat_matrix(t, spec).unwrap());
        let oracle = basis.project(|x| heat_flow_h0(t, x)).unwrap();
        let err: f64 = evolved
            .coeffs()
            .iter()
            .zip(oracle.coeffs())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-4, "L2 error {err}");
        // ⟨e^{tΔ}h_0, h_0⟩ = (1+t)^{-1/2}
        assert!((evolved.coeffs()[0] - 1.5f64.powf(-0.5)).abs() < 1e-8);
    }

    #[test]
    fn csv_dump_layout() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.5]);
        let mut buf = Vec::new();
        write_matrix_csv(&m, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "i,j,value\n0,0,1\n0,1,2\n1,0,3\n1,1,4.5\n"
        );
    }
}
