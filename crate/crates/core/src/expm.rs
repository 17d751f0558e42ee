//! Matrix exponential by scaling and squaring with a degree-13 Padé approximant.

use crate::error::{Error, Result};
use crate::linalg::CMat;
use num_complex::Complex64;

const B: [f64; 14] = [
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

fn one_norm(a: &CMat) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scale(m: &CMat, x: f64) -> CMat {
    m * Complex64::new(x, 0.0)
}

pub fn expm(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
    }
    let norm = one_norm(a);
    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let a = scale(a, 0.5f64.powi(s));

    let id = CMat::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = scale(&a6, B[13]) + scale(&a4, B[11]) + scale(&a2, B[9]);
    let u = &a
        * (&a6 * inner_u
            + scale(&a6, B[7])
            + scale(&a4, B[5])
            + scale(&a2, B[3])
            + scale(&id, B[1]));
    let inner_v = scale(&a6, B[12]) + scale(&a4, B[10]) + scale(&a2, B[8]);
    let v = &a6 * inner_v
        + scale(&a6, B[6])
        + scale(&a4, B[4])
        + scale(&a2, B[2])
        + scale(&id, B[0]);

    let mut x = (&v - &u).lu().solve(&(&v + &u)).ok_or(Error::Singular)?;
    for _ in 0..s {
        x = &x * &x;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, max_abs};

    #[test]
    fn zero_gives_identity() {
        let e = expm(&CMat::zeros(3, 3)).unwrap();
        assert!(max_abs(&(e - CMat::identity(3, 3))) < 1e-15);
    }

    #[test]
    fn diagonal_matches_scalar_exp() {
        let a = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(2.0, 1.0), c(-30.0, 0.0)]));
        let e = expm(&a).unwrap();
        let want = c(2.0, 1.0).exp();
        assert!((e[(0, 0)] - want).norm() < 1e-13 * want.norm());
        assert!((e[(1, 1)].re - (-30.0f64).exp()).abs() < 1e-25);
    }

    #[test]
    fn nilpotent_block() {
        // exp([[0, t], [0, 0]]) = [[1, t], [0, 1]]
        let mut a = CMat::zeros(2, 2);
        a[(0, 1)] = c(100.0, 0.0);
        let e = expm(&a).unwrap();
        assert!((e[(0, 1)] - c(100.0, 0.0)).norm() < 1e-10);
        assert!((e[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rotation_generator() {
        let phi = 7.3;
        let mut a = CMat::zeros(2, 2);
        a[(0, 1)] = c(-phi, 0.0);
        a[(1, 0)] = c(phi, 0.0);
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)].re - phi.cos()).abs() < 1e-13);
        assert!((e[(1, 0)].re - phi.sin()).abs() < 1e-13);
    }
}
