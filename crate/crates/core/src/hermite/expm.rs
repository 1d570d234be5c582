//! Matrix exponential by scaling and squaring with a [13/13] Padé approximant.

use nalgebra::DMatrix;

const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA_13: f64 = 5.371920351148152;

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.nrows();
    let identity = DMatrix::<f64>::identity(n, n);
    let norm = one_norm(a);
    if norm == 0.0 {
        return identity;
    }
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a = a / 2f64.powi(squarings);

    let b = &PADE_13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &identity * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &identity * b[0];

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular for the scaled matrix");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-3.0, 0.5, -40.0]));
        let e = expm(&a);
        assert!((e[(0, 0)] - (-3f64).exp()).abs() < 1e-15);
        assert!((e[(1, 1)] - 0.5f64.exp()).abs() < 1e-14);
        assert!((e[(2, 2)] - (-40f64).exp()).abs() < 1e-25);
        assert_eq!(e[(0, 1)], 0.0);
    }

    #[test]
    fn rotation_generator() {
        let t = 1.3;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -t, t, 0.0]);
        let e = expm(&a);
        assert!((e[(0, 0)] - t.cos()).abs() < 1e-14);
        assert!((e[(1, 0)] - t.sin()).abs() < 1e-14);
    }

    #[test]
    fn zero_is_identity() {
        let e = expm(&DMatrix::zeros(4, 4));
        assert_eq!(e, DMatrix::identity(4, 4));
    }
}
