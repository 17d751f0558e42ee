//! Dense complex matrix helpers shared by the decomposition modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RMat = DMatrix<f64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn relative(dev: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        dev / scale
    } else {
        dev
    }
}

/// max|m − m†| / max|m|.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    relative(max_abs(&(m - m.adjoint())), max_abs(m))
}

/// max|m − mᵀ| / max|m|.
pub fn symmetric_deviation(m: &CMat) -> f64 {
    relative(max_abs(&(m - m.transpose())), max_abs(m))
}

/// max|u u† − I|.
pub fn unitarity_deviation(u: &CMat) -> f64 {
    let n = u.nrows();
    max_abs(&(u * u.adjoint() - CMat::identity(n, n)))
}

/// ‖Im m‖_F / ‖m‖_F.
pub fn imaginary_fraction(m: &CMat) -> f64 {
    let im = m.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
    relative(im, frobenius(m))
}

/// Assemble `[[a, b], [c, d]]` from four n×n blocks.
pub fn block2(a: &CMat, b: &CMat, c: &CMat, d: &CMat) -> CMat {
    let n = a.nrows();
    let mut out = CMat::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((0, n), (n, n)).copy_from(b);
    out.view_mut((n, 0), (n, n)).copy_from(c);
    out.view_mut((n, n), (n, n)).copy_from(d);
    out
}

pub fn block(m: &CMat, row: usize, col: usize, n: usize) -> CMat {
    m.view((row * n, col * n), (n, n)).into_owned()
}

/// Indices ordering `values` descending; ties keep their original order.
pub fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

pub fn permute_columns(m: &CMat, order: &[usize]) -> CMat {
    CMat::from_fn(m.nrows(), order.len(), |i, j| m[(i, order[j])])
}

/// Complete the orthonormal columns of `partial` (n×k) to an n×n unitary.
pub fn complete_unitary(partial: &CMat) -> CMat {
    let n = partial.nrows();
    let mut cols: Vec<CVec> = partial.column_iter().map(|c| c.into_owned()).collect();
    for e in 0..n {
        if cols.len() == n {
            break;
        }
        let mut v = CVec::zeros(n);
        v[e] = Complex64::new(1.0, 0.0);
        // two Gram-Schmidt passes
        for _ in 0..2 {
            for c in &cols {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            cols.push(v / Complex64::new(norm, 0.0));
        }
    }
    CMat::from_columns(&cols)
}

pub fn random_complex<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Unitary from the QR factorization of a random complex matrix, with the
/// diagonal of R made positive.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let qr = random_complex(n, n, rng).qr();
    let (q, r) = qr.unpack();
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let a = random_complex(n, n, rng);
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn random_symmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let a = random_complex(n, n, rng);
    (&a + a.transpose()) * Complex64::new(0.5, 0.0)
}

pub fn diag_real(values: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(
        values.len(),
        values.iter().map(|&x| Complex64::new(x, 0.0)),
    ))
}
