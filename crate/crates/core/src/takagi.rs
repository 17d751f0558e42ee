//! Takagi factorization `A = V R Vᵀ` of complex symmetric matrices.
//!
//! Three entry points: a spectral shortcut for real symmetric input, a
//! general SVD-plus-cluster algorithm, and [`takagi`] which picks between
//! them from the relative imaginary norm of the input.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    complete_unitary, descending_order, diag_real, frobenius, imaginary_fraction, permute_columns,
    symmetric_deviation, CMat, CVec, RMat, I,
};

/// Relative symmetry tolerance accepted on input.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Relative imaginary norm below which [`takagi`] uses the real path.
pub const DEFAULT_REAL_THRESHOLD: f64 = 1e-10;
/// Neighbouring singular values with relative gap below this share a cluster.
const CLUSTER_GAP: f64 = 1e-4;
/// Residual above which the cluster result is discarded for the embedding path.
const ACCEPT_RESIDUAL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct TakagiFactors {
    pub v: CMat,
    /// Nonnegative, descending.
    pub r: Vec<f64>,
}

impl TakagiFactors {
    pub fn n(&self) -> usize {
        self.r.len()
    }

    pub fn reconstruct(&self) -> CMat {
        &self.v * diag_real(&self.r) * self.v.transpose()
    }

    fn identity(n: usize) -> Self {
        TakagiFactors { v: CMat::identity(n, n), r: vec![0.0; n] }
    }
}

/// ‖a − V R Vᵀ‖_F / max(‖a‖_F, ε).
pub fn takagi_residual(a: &CMat, f: &TakagiFactors) -> f64 {
    if a.nrows() != f.v.nrows() {
        return f64::INFINITY;
    }
    frobenius(&(a - f.reconstruct())) / frobenius(a).max(f64::MIN_POSITIVE)
}

fn check_square_symmetric(a: &CMat) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
    }
    let deviation = symmetric_deviation(a);
    if deviation > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { deviation });
    }
    Ok(())
}

/// Dispatch on realness: the spectral path when ‖Im a‖_F/‖a‖_F ≤ `real_threshold`,
/// the general path otherwise.
pub fn takagi(a: &CMat, real_threshold: f64) -> Result<TakagiFactors> {
    check_square_symmetric(a)?;
    if imaginary_fraction(a) <= real_threshold {
        Ok(takagi_of_real(&a.map(|z| z.re)))
    } else {
        takagi_general(a)
    }
}

/// Spectral shortcut for real symmetric matrices: `a = O Λ Oᵀ`, then
/// `V_j = O_j` for `λ_j ≥ 0` and `V_j = i O_j` otherwise.
pub fn takagi_real_symmetric(a: &CMat) -> Result<TakagiFactors> {
    check_square_symmetric(a)?;
    let deviation = imaginary_fraction(a);
    if deviation > SYMMETRY_TOL {
        return Err(Error::NotReal { deviation });
    }
    Ok(takagi_of_real(&a.map(|z| z.re)))
}

/// Eigenpairs of a real symmetric matrix with the sign convention applied,
/// ordered by |λ| descending, positive before negative on ties.
pub(crate) fn signed_eigen(a: &RMat) -> (Vec<f64>, RMat) {
    let n = a.nrows();
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let ev = &eig.eigenvalues;
    let order = magnitude_order(ev.as_slice());
    let mut o = RMat::zeros(n, n);
    let mut lambda = Vec::with_capacity(n);
    for (k, &idx) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(idx).into_owned();
        fix_sign(col.as_mut_slice());
        o.set_column(k, &col);
        lambda.push(ev[idx]);
    }
    (lambda, o)
}

/// Order by |λ| descending. Values whose magnitudes agree to 1e-9 of the
/// largest count as a tie and put the positive one first.
pub(crate) fn magnitude_order(ev: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ev.len()).collect();
    order.sort_by(|&i, &j| ev[j].abs().total_cmp(&ev[i].abs()).then(ev[j].total_cmp(&ev[i])));
    let tol = 1e-9 * ev.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut k = 0;
    while k + 1 < order.len() {
        let (a, b) = (ev[order[k]], ev[order[k + 1]]);
        if (a.abs() - b.abs()).abs() <= tol && a < 0.0 && b >= 0.0 {
            order.swap(k, k + 1);
            k += 2;
        } else {
            k += 1;
        }
    }
    order
}

/// Make the first entry within 1e-12 (relative) of the largest magnitude positive.
pub(crate) fn fix_sign(col: &mut [f64]) {
    let max = col.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    if let Some(&lead) = col.iter().find(|x| x.abs() >= max * (1.0 - 1e-12)) {
        if lead < 0.0 {
            col.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn takagi_of_real(a: &RMat) -> TakagiFactors {
    let n = a.nrows();
    if a.iter().all(|&x| x == 0.0) {
        return TakagiFactors::identity(n);
    }
    let (lambda, o) = signed_eigen(a);
    let mut v = CMat::zeros(n, n);
    for (j, &l) in lambda.iter().enumerate() {
        let phase = if l >= 0.0 { Complex64::new(1.0, 0.0) } else { I };
        for i in 0..n {
            v[(i, j)] = phase * o[(i, j)];
        }
    }
    TakagiFactors { v, r: lambda.iter().map(|l| l.abs()).collect() }
}

/// General complex symmetric Takagi factorization.
///
/// With `a = P Σ W†`, columns of `P` are grouped into clusters of close
/// singular values. Each cluster spans an invariant subspace, so the
/// projected block `B = P_c† a P̄_c` is small and symmetric; its factors from
/// the real embedding `[[X, Y], [Y, −X]]` (with `B = X + iY`) give
/// `V_c = P_c V_B`. Values at rounding level are set to zero. If the
/// result misses the residual target, the embedding of the whole matrix is
/// tried instead.
pub fn takagi_general(a: &CMat) -> Result<TakagiFactors> {
    check_square_symmetric(a)?;
    let n = a.nrows();
    if n == 0 || frobenius(a) == 0.0 {
        return Ok(TakagiFactors::identity(n));
    }
    let sym = (a + a.transpose()) * Complex64::new(0.5, 0.0);

    let clustered = clustered(&sym);
    let res = takagi_residual(&sym, &clustered);
    if res <= ACCEPT_RESIDUAL {
        return Ok(clustered);
    }
    let embedded = embedding(&sym);
    let res_e = takagi_residual(&sym, &embedded);
    if res_e <= ACCEPT_RESIDUAL {
        return Ok(embedded);
    }
    Err(Error::Convergence { algorithm: "takagi_general", residual: res.min(res_e) })
}

fn zero_level(n: usize, largest: f64) -> f64 {
    2.0 * n as f64 * f64::EPSILON * largest
}

fn clustered(a: &CMat) -> TakagiFactors {
    let n = a.nrows();
    let svd = a.clone().svd(true, false);
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let order = descending_order(&sv);
    let p = permute_columns(&svd.u.unwrap(), &order);
    let sigma: Vec<f64> = order.iter().map(|&k| sv[k]).collect();
    let zero = zero_level(n, sigma[0]);

    let mut v = p.clone();
    let mut r = vec![0.0; n];
    let mut start = 0;
    while start < n && sigma[start] > zero {
        let mut end = start + 1;
        while end < n && sigma[end] > zero && sigma[end - 1] - sigma[end] <= CLUSTER_GAP * sigma[end - 1] {
            end += 1;
        }
        let len = end - start;
        let pc = p.columns(start, len).into_owned();
        let b = pc.adjoint() * a * pc.conjugate();
        let b = (&b + b.transpose()) * Complex64::new(0.5, 0.0);
        let f = embedding(&b);
        v.columns_mut(start, len).copy_from(&(&pc * &f.v));
        r[start..end].copy_from_slice(&f.r);
        start = end;
    }
    TakagiFactors { v, r }
}

fn embedding(a: &CMat) -> TakagiFactors {
    let n = a.nrows();
    let x = a.map(|z| z.re);
    let y = a.map(|z| z.im);
    let mut m = RMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&x);
    m.view_mut((0, n), (n, n)).copy_from(&y);
    m.view_mut((n, 0), (n, n)).copy_from(&y);
    m.view_mut((n, n), (n, n)).copy_from(&(-&x));
    let eig = SymmetricEigen::new(m);
    let lambda: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let order = descending_order(&lambda);
    let zero = zero_level(2 * n, lambda[order[0]].abs());
    let mut cols = Vec::new();
    let mut r = Vec::new();
    for &k in order.iter().take(n) {
        if lambda[k] <= zero {
            break;
        }
        let e = eig.eigenvectors.column(k);
        let v = CVec::from_fn(n, |i, _| Complex64::new(e[i], e[i + n]));
        let norm = v.norm();
        cols.push(v / Complex64::new(norm, 0.0));
        r.push(lambda[k]);
    }
    let partial = if cols.is_empty() { CMat::zeros(n, 0) } else { CMat::from_columns(&cols) };
    let v = complete_unitary(&partial);
    r.resize(n, 0.0);
    TakagiFactors { v, r }
}
