//! Twin-beam spectra: Schmidt decomposition of the JSA, eigenmodes built from
//! Schmidt pairs, the associated Hermitian matrix, and pairing analysis.
//!
//! Mode vectors are stored in grid order, idler half first, so that they act
//! directly on the squeezing matrix of [`crate::pdc`].

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{block, block2, frobenius, hermitian_deviation, imaginary_fraction, CMat, I};
use crate::takagi::{magnitude_order, signed_eigen, TakagiFactors, DEFAULT_REAL_THRESHOLD};

/// Pair gap below which two modes count as an exactly degenerate pair for
/// [`rotate_pair`].
pub const EXACT_PAIR_TOL: f64 = 1e-8;

/// Signal × idler coupling block `−iJ` with its two detuning grids.
#[derive(Debug, Clone)]
pub struct JointSpectralAmplitude {
    /// Rows follow `signal_grid`, columns follow `idler_grid`.
    pub j_matrix: CMat,
    pub signal_grid: Vec<f64>,
    pub idler_grid: Vec<f64>,
}

impl JointSpectralAmplitude {
    pub fn m(&self) -> usize {
        self.j_matrix.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let (r, c) = self.j_matrix.shape();
        if r != c || self.signal_grid.len() != r || self.idler_grid.len() != c {
            return Err(Error::DimensionMismatch { expected: r, found: c.max(self.signal_grid.len()) });
        }
        if !self.j_matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::validation("jsa", "non-finite entries"));
        }
        for g in [&self.signal_grid, &self.idler_grid] {
            if g.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::validation("jsa", "detuning grid must be strictly increasing"));
            }
        }
        Ok(())
    }

    /// Squeezing matrix with zero diagonal blocks, in grid order:
    /// `[[0, Jᵀ], [J, 0]]`.
    pub fn block_matrix(&self) -> CMat {
        let m = self.m();
        let z = CMat::zeros(m, m);
        block2(&z, &self.j_matrix.transpose(), &self.j_matrix, &z)
    }
}

/// `−iJ = C R Dᵀ*`, columns of `c` are signal modes and of `d` idler modes.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub c: CMat,
    pub d: CMat,
    pub values: Vec<f64>,
}

impl SchmidtDecomposition {
    pub fn reconstruct(&self) -> CMat {
        &self.c * crate::linalg::diag_real(&self.values) * self.d.adjoint()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSource {
    JsaSvd,
    AssociatedSpectral,
    DirectTakagi,
}

/// Consecutive values `(first, second)` with gap `|r_first − r_second| / r₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModePair {
    pub first: usize,
    pub second: usize,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct SqueezingSpectrum {
    /// Descending r_k.
    pub values: Vec<f64>,
    /// Unitary V, one column per value.
    pub modes: CMat,
    pub pairs: Vec<ModePair>,
    pub source: SpectrumSource,
}

impl SqueezingSpectrum {
    pub fn new(values: Vec<f64>, modes: CMat, source: SpectrumSource) -> Self {
        let pairs = consecutive_pairs(&values);
        SqueezingSpectrum { values, modes, pairs, source }
    }

    pub fn from_takagi(f: TakagiFactors) -> Self {
        SqueezingSpectrum::new(f.r, f.v, SpectrumSource::DirectTakagi)
    }

    pub fn factors(&self) -> TakagiFactors {
        TakagiFactors { v: self.modes.clone(), r: self.values.clone() }
    }
}

fn consecutive_pairs(values: &[f64]) -> Vec<ModePair> {
    let r1 = values.first().copied().unwrap_or(0.0);
    (0..values.len() / 2)
        .map(|k| {
            let (a, b) = (values[2 * k], values[2 * k + 1]);
            let gap = if r1 > 0.0 { (a - b).abs() / r1 } else { 0.0 };
            ModePair { first: 2 * k, second: 2 * k + 1, gap }
        })
        .collect()
}

/// Rotate the phase of a column so its leading entry (the first within
/// 1e-12 of the largest magnitude) is real and positive.
fn normalize_phase(v: &mut [Complex64]) -> Complex64 {
    let max = v.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if max == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let lead = *v.iter().find(|z| z.norm() >= max * (1.0 - 1e-12)).unwrap();
    let rot = lead.conj() / lead.norm();
    v.iter_mut().for_each(|z| *z *= rot);
    rot
}

/// SVD of the stored `−iJ`, values descending. Each pair `(C_j, D_j)` gets a
/// common phase making the leading entry of `C_j` real positive; for a real
/// JSA this returns real Schmidt modes.
pub fn schmidt_from_jsa(jsa: &JointSpectralAmplitude) -> Result<SchmidtDecomposition> {
    jsa.validate()?;
    let m = jsa.m();
    let svd = jsa.j_matrix.clone().svd(true, true);
    let u = svd.u.ok_or(Error::Convergence { algorithm: "svd", residual: f64::NAN })?;
    let w = svd.v_t.ok_or(Error::Convergence { algorithm: "svd", residual: f64::NAN })?.adjoint();
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let order = crate::linalg::descending_order(&sv);
    let mut c = CMat::zeros(m, m);
    let mut d = CMat::zeros(m, m);
    for (k, &j) in order.iter().enumerate() {
        let mut cj = u.column(j).into_owned();
        let rot = normalize_phase(cj.as_mut_slice());
        let dj = w.column(j) * rot;
        c.set_column(k, &cj);
        d.set_column(k, &dj);
    }
    let values = order.iter().map(|&k| sv[k]).collect();
    Ok(SchmidtDecomposition { c, d, values })
}

/// Pair `j` gives mode A = (D̄_j; C_j)/√2 and mode B = (−iD̄_j; iC_j)/√2 in
/// grid order, both with value r_j.
pub fn eigenmodes_from_schmidt(sd: &SchmidtDecomposition) -> SqueezingSpectrum {
    let m = sd.values.len();
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut v = CMat::zeros(2 * m, 2 * m);
    let mut values = Vec::with_capacity(2 * m);
    for j in 0..m {
        for i in 0..m {
            let idl = sd.d[(i, j)].conj() * s;
            let sig = sd.c[(i, j)] * s;
            v[(i, 2 * j)] = idl;
            v[(m + i, 2 * j)] = sig;
            v[(i, 2 * j + 1)] = -I * idl;
            v[(m + i, 2 * j + 1)] = I * sig;
        }
        values.push(sd.values[j]);
        values.push(sd.values[j]);
    }
    SqueezingSpectrum::new(values, v, SpectrumSource::JsaSvd)
}

/// Γ with its idler rows conjugated: `[[Γ_ii*, Γ_is*], [Γ_si, Γ_ss]]`.
/// For a block-structured Γ this is `[[0, J†], [J, 0]]`.
pub fn associated_matrix(gamma: &CMat) -> Result<CMat> {
    let n = gamma.nrows();
    if n % 2 != 0 || gamma.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n + n % 2, found: gamma.ncols() });
    }
    let m = n / 2;
    Ok(block2(
        &block(gamma, 0, 0, m).conjugate(),
        &block(gamma, 0, 1, m).conjugate(),
        &block(gamma, 1, 0, m),
        &block(gamma, 1, 1, m),
    ))
}

/// Spectral decomposition of the associated matrix Γ_a.
///
/// Each eigenpair `(λ, U)` yields a mode: `U` with its idler half
/// conjugated, times `i` when `λ < 0`, with `r = |λ|`. When Γ_a is real to
/// [`DEFAULT_REAL_THRESHOLD`] the real symmetric solver is used and the
/// modes come out purely real (λ ≥ 0) or purely imaginary (λ < 0). Within a
/// pair the λ ≥ 0 mode comes first.
pub fn associated_spectral(gamma: &CMat) -> Result<SqueezingSpectrum> {
    let ga = associated_matrix(gamma)?;
    let n = ga.nrows();
    let m = n / 2;
    let deviation = hermitian_deviation(&ga);
    if deviation > 1e-10 {
        return Err(Error::NotHermitian { deviation });
    }
    if frobenius(&ga) == 0.0 {
        return Ok(SqueezingSpectrum::new(vec![0.0; n], CMat::identity(n, n), SpectrumSource::AssociatedSpectral));
    }

    let (lambda, u): (Vec<f64>, CMat) = if imaginary_fraction(&ga) <= DEFAULT_REAL_THRESHOLD {
        let (l, o) = signed_eigen(&ga.map(|z| z.re));
        (l, crate::linalg::to_complex(&o))
    } else {
        let herm = (&ga + ga.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(herm);
        let ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let order = magnitude_order(&ev);
        let mut u = CMat::zeros(n, n);
        for (k, &idx) in order.iter().enumerate() {
            let mut col = eig.eigenvectors.column(idx).into_owned();
            normalize_phase(col.as_mut_slice());
            u.set_column(k, &col);
        }
        (order.iter().map(|&k| ev[k]).collect(), u)
    };

    let mut modes = u;
    for (k, &l) in lambda.iter().enumerate() {
        let mut col = modes.column_mut(k);
        for i in 0..m {
            col[i] = col[i].conj();
        }
        if l < 0.0 {
            col *= I;
        }
    }
    let values = lambda.iter().map(|l| l.abs()).collect();
    Ok(SqueezingSpectrum::new(values, modes, SpectrumSource::AssociatedSpectral))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingReport {
    pub rel_tol: f64,
    pub accepted: Vec<ModePair>,
    /// 1-based index of the first value that could not be paired.
    pub first_failure: Option<usize>,
}

impl PairingReport {
    pub fn accepted_values(&self) -> usize {
        2 * self.accepted.len()
    }
}

/// Walk consecutive values; a pair is accepted while `|r_{2k−1} − r_{2k}|/r₁ ≤ rel_tol`.
pub fn pair_eigenvalues(values: &[f64], rel_tol: f64) -> PairingReport {
    let mut accepted = Vec::new();
    let mut first_failure = None;
    for p in consecutive_pairs(values) {
        if p.gap <= rel_tol {
            accepted.push(p);
        } else {
            first_failure = Some(p.first + 1);
            break;
        }
    }
    if first_failure.is_none() && values.len() % 2 == 1 {
        first_failure = Some(values.len());
    }
    PairingReport { rel_tol, accepted, first_failure }
}

/// `K_S = (Σ r)² / Σ r²`.
pub fn schmidt_number(values: &[f64]) -> Result<f64> {
    if values.iter().any(|&r| !(r >= 0.0)) {
        return Err(Error::validation("values", "squeezing values must be nonnegative"));
    }
    let s: f64 = values.iter().sum();
    let s2: f64 = values.iter().map(|r| r * r).sum();
    if s2 == 0.0 {
        return Err(Error::validation("values", "all values are zero"));
    }
    Ok(s * s / s2)
}

/// K_S of the ideal doubled geometric spectrum `r_{1+2l} = r_{2+2l} = q^l`.
pub fn geometric_schmidt_number(q: f64) -> f64 {
    2.0 * (1.0 + q) / (1.0 - q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricFit {
    pub r1: f64,
    pub q: f64,
    /// RMS residual of the fit in ln r.
    pub rms_residual: f64,
    pub pairs_used: usize,
}

/// Least-squares fit of `ln r_l = ln r₁ + l ln q` over pair index `l`, using
/// the mean of each consecutive pair, pairs with `r ≥ 1e-6·r₁` and at most
/// `max_pairs` of them.
pub fn fit_geometric(values: &[f64], max_pairs: Option<usize>) -> Result<GeometricFit> {
    let r1 = values.first().copied().unwrap_or(0.0);
    if !(r1 > 0.0) {
        return Err(Error::validation("values", "leading value must be positive"));
    }
    let limit = max_pairs.unwrap_or(usize::MAX);
    let pts: Vec<(f64, f64)> = values
        .chunks_exact(2)
        .map(|p| 0.5 * (p[0] + p[1]))
        .take_while(|&r| r >= 1e-6 * r1)
        .take(limit)
        .enumerate()
        .map(|(l, r)| (l as f64, r.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::validation("values", format!("need at least 3 pairs above 1e-6·r1, got {}", pts.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok(GeometricFit { r1: icpt.exp(), q: slope.exp(), rms_residual: rms, pairs_used: pts.len() })
}

/// Orthogonal rotation of the two modes of pair `pair_index` (0-based):
/// `A' = A cos φ + B sin φ`, `B' = −A sin φ + B cos φ`.
pub fn rotate_pair(spectrum: &SqueezingSpectrum, pair_index: usize, phi: f64) -> Result<SqueezingSpectrum> {
    let p = *spectrum
        .pairs
        .get(pair_index)
        .ok_or_else(|| Error::validation("pair_index", format!("{pair_index} out of range ({} pairs)", spectrum.pairs.len())))?;
    if p.gap > EXACT_PAIR_TOL {
        return Err(Error::validation("pair_index", format!("pair {pair_index} is not degenerate (gap {:.3e})", p.gap)));
    }
    let a = spectrum.modes.column(p.first).into_owned();
    let b = spectrum.modes.column(p.second).into_owned();
    let (s, c) = phi.sin_cos();
    let rc = |x: f64| Complex64::new(x, 0.0);
    let mut out = spectrum.clone();
    out.modes.set_column(p.first, &(&a * rc(c) + &b * rc(s)));
    out.modes.set_column(p.second, &(&b * rc(c) - &a * rc(s)));
    Ok(out)
}

/// Fraction of each mode's weight lying in the signal half of the grid
/// (0.5 for an ideal twin-beam mode).
pub fn signal_weight(spectrum: &SqueezingSpectrum) -> Vec<f64> {
    let n = spectrum.modes.nrows();
    let m = n / 2;
    spectrum
        .modes
        .column_iter()
        .map(|col| {
            let tot = col.norm_squared();
            let sig: f64 = col.rows(m, n - m).norm_squared();
            if tot > 0.0 {
                sig / tot
            } else {
                0.0
            }
        })
        .collect()
}

/// Gram-matrix deviation of a mode set from the identity.
pub fn orthonormality_deviation(modes: &CMat) -> f64 {
    let n = modes.ncols();
    crate::linalg::max_abs(&(modes.adjoint() * modes - CMat::identity(n, n)))
}
