//! Complex symplectic matrices acting on the stacked vector `(a; a†)`.
//!
//! A transform is stored by its two blocks; the full matrix is
//! `[[s0, sI], [sI*, s0*]]` and satisfies `S K S† = K` with `K = diag(I, −I)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::linalg::{
    block, block2, diag_real, hermitian_deviation, max_abs, symmetric_deviation,
    unitarity_deviation, CMat, CVec,
};
use crate::takagi::takagi_general;

/// Symmetry/Hermiticity tolerance for generator and covariance blocks.
pub const BLOCK_TOL: f64 = 1e-12;
/// Symplectic residual tolerance, relative to max|S|².
pub const SYMPLECTIC_TOL: f64 = 1e-10;
/// Reconstruction tolerance for the Bloch-Messiah factors.
pub const BLOCH_MESSIAH_TOL: f64 = 1e-8;

/// `K = diag(I, −I)` of size 2n.
pub fn k_matrix(n: usize) -> CMat {
    let mut k = CMat::identity(2 * n, 2 * n);
    for i in n..2 * n {
        k[(i, i)] = Complex64::new(-1.0, 0.0);
    }
    k
}

/// Hermitian generator `H = [[h0, hI], [hI*, h0*]]`.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    h0: CMat,
    h_i: CMat,
}

impl GeneratorMatrix {
    pub fn new(h0: CMat, h_i: CMat) -> Result<Self> {
        let n = h0.nrows();
        for m in [&h0, &h_i] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.ncols() });
            }
        }
        let dh = hermitian_deviation(&h0);
        if dh > BLOCK_TOL {
            return Err(Error::NotHermitian { deviation: dh });
        }
        let ds = symmetric_deviation(&h_i);
        if ds > BLOCK_TOL {
            return Err(Error::NotSymmetric { deviation: ds });
        }
        Ok(GeneratorMatrix { h0, h_i })
    }

    pub fn n(&self) -> usize {
        self.h0.nrows()
    }
    pub fn h0(&self) -> &CMat {
        &self.h0
    }
    pub fn h_i(&self) -> &CMat {
        &self.h_i
    }

    pub fn full(&self) -> CMat {
        block2(&self.h0, &self.h_i, &self.h_i.conjugate(), &self.h0.conjugate())
    }

    pub fn neg(&self) -> Self {
        GeneratorMatrix { h0: -&self.h0, h_i: -&self.h_i }
    }
}

#[derive(Debug, Clone)]
pub struct SymplecticMatrix {
    s0: CMat,
    s_i: CMat,
}

impl SymplecticMatrix {
    /// Validated construction; fails if `S K S† ≠ K` beyond [`SYMPLECTIC_TOL`].
    pub fn new(s0: CMat, s_i: CMat) -> Result<Self> {
        let n = s0.nrows();
        if s0.ncols() != n || s_i.nrows() != n || s_i.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: s_i.nrows() });
        }
        let s = SymplecticMatrix { s0, s_i };
        let residual = s.residual();
        if residual > SYMPLECTIC_TOL {
            return Err(Error::NotSymplectic { residual });
        }
        Ok(s)
    }

    pub(crate) fn from_blocks_unchecked(s0: CMat, s_i: CMat) -> Self {
        SymplecticMatrix { s0, s_i }
    }

    fn from_full(m: &CMat) -> Self {
        let n = m.nrows() / 2;
        SymplecticMatrix { s0: block(m, 0, 0, n), s_i: block(m, 0, 1, n) }
    }

    pub fn identity(n: usize) -> Self {
        SymplecticMatrix { s0: CMat::identity(n, n), s_i: CMat::zeros(n, n) }
    }

    pub fn n(&self) -> usize {
        self.s0.nrows()
    }
    pub fn s0(&self) -> &CMat {
        &self.s0
    }
    pub fn s_i(&self) -> &CMat {
        &self.s_i
    }

    pub fn full(&self) -> CMat {
        block2(&self.s0, &self.s_i, &self.s_i.conjugate(), &self.s0.conjugate())
    }

    /// max|S K S† − K| / max(1, max|S|)².
    pub fn residual(&self) -> f64 {
        let n = self.n();
        let s = self.full();
        let k = k_matrix(n);
        let dev = max_abs(&(&s * &k * s.adjoint() - &k));
        dev / max_abs(&s).max(1.0).powi(2)
    }

    /// Symplectic inverse `K S† K`.
    pub fn inverse(&self) -> Self {
        SymplecticMatrix { s0: self.s0.adjoint(), s_i: -self.s_i.transpose() }
    }

    /// Top half of `S (α; α*)`.
    pub fn apply(&self, alpha: &CVec) -> CVec {
        &self.s0 * alpha + &self.s_i * alpha.conjugate()
    }
}

/// `exp(−i K H)` on the full 2n matrix.
pub fn exponentiate_generator(g: &GeneratorMatrix) -> Result<SymplecticMatrix> {
    let n = g.n();
    let arg = k_matrix(n) * g.full() * Complex64::new(0.0, -1.0);
    let s = SymplecticMatrix::from_full(&expm(&arg)?);
    let residual = s.residual();
    if residual > SYMPLECTIC_TOL {
        return Err(Error::NotSymplectic { residual });
    }
    Ok(s)
}

/// Block product `s2 · s1`.
pub fn compose(s2: &SymplecticMatrix, s1: &SymplecticMatrix) -> Result<SymplecticMatrix> {
    if s2.n() != s1.n() {
        return Err(Error::DimensionMismatch { expected: s2.n(), found: s1.n() });
    }
    let s0 = &s2.s0 * &s1.s0 + &s2.s_i * s1.s_i.conjugate();
    let s_i = &s2.s0 * &s1.s_i + &s2.s_i * s1.s0.conjugate();
    Ok(SymplecticMatrix { s0, s_i })
}

pub fn passive_transform(u: &CMat) -> Result<SymplecticMatrix> {
    if u.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch { expected: u.nrows(), found: u.ncols() });
    }
    let deviation = unitarity_deviation(u);
    if deviation > SYMPLECTIC_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    let n = u.nrows();
    Ok(SymplecticMatrix { s0: u.clone(), s_i: CMat::zeros(n, n) })
}

pub fn mode_wise_squeezer(r: &[f64]) -> Result<SymplecticMatrix> {
    if let Some(bad) = r.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
        return Err(Error::validation("r", format!("squeezing parameters must be finite and >= 0, got {bad}")));
    }
    let ch: Vec<f64> = r.iter().map(|x| x.cosh()).collect();
    let sh: Vec<f64> = r.iter().map(|x| x.sinh()).collect();
    Ok(SymplecticMatrix { s0: diag_real(&ch), s_i: diag_real(&sh) })
}

/// Symplectic matrix of `exp(r(ab − a†b†))`.
pub fn two_mode_squeezer(r: f64) -> SymplecticMatrix {
    let ch = Complex64::new(r.cosh(), 0.0);
    let sh = Complex64::new(-r.sinh(), 0.0);
    let z = Complex64::new(0.0, 0.0);
    SymplecticMatrix {
        s0: CMat::from_row_slice(2, 2, &[ch, z, z, ch]),
        s_i: CMat::from_row_slice(2, 2, &[z, sh, sh, z]),
    }
}

/// `s0 = V cosh(R) Q†`, `sI = V sinh(R) Qᵀ`.
#[derive(Debug, Clone)]
pub struct BlochMessiahFactors {
    pub v: CMat,
    pub r: Vec<f64>,
    pub q: CMat,
}

impl BlochMessiahFactors {
    pub fn reconstruct(&self) -> SymplecticMatrix {
        let ch: Vec<f64> = self.r.iter().map(|x| x.cosh()).collect();
        let sh: Vec<f64> = self.r.iter().map(|x| x.sinh()).collect();
        SymplecticMatrix {
            s0: &self.v * diag_real(&ch) * self.q.adjoint(),
            s_i: &self.v * diag_real(&sh) * self.q.transpose(),
        }
    }

    /// max|S − S_rebuilt| / max|S| over both blocks.
    pub fn residual(&self, s: &SymplecticMatrix) -> f64 {
        let b = self.reconstruct();
        let dev = max_abs(&(&s.s0 - &b.s0)).max(max_abs(&(&s.s_i - &b.s_i)));
        dev / max_abs(&s.s0).max(max_abs(&s.s_i))
    }
}

/// Takagi of `s0 sIᵀ = V (½ sinh 2R) Vᵀ` fixes V and R; then `Q = s0† V cosh(R)⁻¹`.
pub fn bloch_messiah(s: &SymplecticMatrix) -> Result<BlochMessiahFactors> {
    let residual = s.residual();
    if residual > BLOCH_MESSIAH_TOL {
        return Err(Error::NotSymplectic { residual });
    }
    let m = &s.s0 * s.s_i.transpose();
    let m = (&m + m.transpose()) * Complex64::new(0.5, 0.0);
    let t = takagi_general(&m)?;
    let r: Vec<f64> = t.r.iter().map(|sigma| 0.5 * (2.0 * sigma).asinh()).collect();
    let inv_ch: Vec<f64> = r.iter().map(|x| 1.0 / x.cosh()).collect();
    let q = s.s0.adjoint() * &t.v * diag_real(&inv_ch);
    let f = BlochMessiahFactors { v: t.v, r, q };
    let res = f.residual(s);
    if !(res <= BLOCH_MESSIAH_TOL) {
        return Err(Error::Convergence { algorithm: "bloch_messiah", residual: res });
    }
    Ok(f)
}

/// Mean `α₀` and covariance blocks of the full `Σ = [[Σ0, ΣI], [ΣI*, Σ0*]]`.
#[derive(Debug, Clone)]
pub struct GaussianState {
    mean: CVec,
    sigma0: CMat,
    sigma_i: CMat,
}

impl GaussianState {
    pub fn new(mean: CVec, sigma0: CMat, sigma_i: CMat) -> Result<Self> {
        let n = mean.len();
        for m in [&sigma0, &sigma_i] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.nrows() });
            }
        }
        let dh = hermitian_deviation(&sigma0);
        if dh > BLOCK_TOL {
            return Err(Error::NotHermitian { deviation: dh });
        }
        let ds = symmetric_deviation(&sigma_i);
        if ds > BLOCK_TOL {
            return Err(Error::NotSymmetric { deviation: ds });
        }
        let st = GaussianState { mean, sigma0, sigma_i };
        let min_eig = nalgebra::SymmetricEigen::new(st.full_covariance())
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        if min_eig < -1e-12 * max_abs(&st.full_covariance()) {
            return Err(Error::validation("sigma", format!("covariance not positive semidefinite (min eigenvalue {min_eig:.3e})")));
        }
        Ok(st)
    }

    pub fn vacuum(n: usize) -> Self {
        GaussianState {
            mean: CVec::zeros(n),
            sigma0: CMat::identity(n, n) * Complex64::new(0.5, 0.0),
            sigma_i: CMat::zeros(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.mean.len()
    }
    pub fn mean(&self) -> &CVec {
        &self.mean
    }
    pub fn sigma0(&self) -> &CMat {
        &self.sigma0
    }
    pub fn sigma_i(&self) -> &CMat {
        &self.sigma_i
    }

    pub fn full_covariance(&self) -> CMat {
        block2(&self.sigma0, &self.sigma_i, &self.sigma_i.conjugate(), &self.sigma0.conjugate())
    }
}

/// `Σ' = S Σ S†`, mean' = top half of `S (α₀; α₀*)`.
pub fn propagate_state(s: &SymplecticMatrix, st: &GaussianState) -> Result<GaussianState> {
    let n = st.n();
    if s.n() != n {
        return Err(Error::DimensionMismatch { expected: s.n(), found: n });
    }
    let full = s.full();
    let sigma = &full * st.full_covariance() * full.adjoint();
    let s0 = block(&sigma, 0, 0, n);
    let si = block(&sigma, 0, 1, n);
    let half = Complex64::new(0.5, 0.0);
    Ok(GaussianState {
        mean: s.apply(&st.mean),
        sigma0: (&s0 + s0.adjoint()) * half,
        sigma_i: (&si + si.transpose()) * half,
    })
}

/// Gaussian Wigner density `(2π)^{-n} det(Σ)^{-1/2} exp(−½ δ† Σ⁻¹ δ)` with
/// `δ = (α − α₀; (α − α₀)*)`.
///
/// The density is normalized over the quadratures `x = √2 Re α`,
/// `p = √2 Im α`; integrating over `d²α` instead gives `2^{-n}`.
pub fn evaluate_wigner(st: &GaussianState, point: &CVec) -> Result<f64> {
    let n = st.n();
    if point.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: point.len() });
    }
    let chol = st.full_covariance().cholesky().ok_or(Error::Singular)?;
    let det: f64 = chol.l_dirty().diagonal().iter().map(|z| z.norm_sqr()).product();
    if !(det > 0.0) {
        return Err(Error::Singular);
    }
    let d = point - &st.mean;
    let mut delta = CVec::zeros(2 * n);
    delta.rows_mut(0, n).copy_from(&d);
    delta.rows_mut(n, n).copy_from(&d.conjugate());
    let solved = chol.solve(&delta);
    let quad = delta.dotc(&solved).re;
    Ok((2.0 * std::f64::consts::PI).powi(-(n as i32)) / det.sqrt() * (-0.5 * quad).exp())
}
