//! Double-Gaussian model of the twin-beam JSA and its complex Mehler
//! factorization into chirped Hermite-Gauss modes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::CVec;
use crate::pdc::{central_dispersion, find_central_detuning, CrystalConfig, PumpConfig};

/// Width of the Gaussian standing in for sinc(x): same FWHM.
pub const SIGMA0: f64 = 1.61;

/// Highest Hermite-Gauss order accepted by [`hermite_gauss`].
pub const MAX_ORDER: usize = 10_000;

/// `h_0..h_{count-1}` at `x` via the normalized three-term recurrence.
pub fn hermite_gauss_all(count: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(count);
    if count == 0 {
        return h;
    }
    h.push(PI.powf(-0.25) * (-0.5 * x * x).exp());
    if count > 1 {
        h.push(2f64.sqrt() * x * h[0]);
    }
    for k in 1..count.saturating_sub(1) {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * h[k] - (kf / (kf + 1.0)).sqrt() * h[k - 1];
        h.push(next);
    }
    h
}

/// Normalized Hermite-Gauss function `h_k(x)`.
pub fn hermite_gauss(k: usize, x: f64) -> Result<f64> {
    if k > MAX_ORDER {
        return Err(Error::validation("k", format!("order {k} exceeds {MAX_ORDER}")));
    }
    Ok(hermite_gauss_all(k + 1, x)[k])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicTimes {
    /// Pump group delay k′_p0 L (fs).
    pub tau_pd: f64,
    /// Pump spread √(k″_p0 L) (fs).
    pub tau_ps: f64,
    /// Pump-signal group delay (k′_p0 − k′0) L (fs).
    pub tau_d: f64,
    /// √(k″0 Δ0) L (fs).
    pub tau_s: f64,
    /// Pump bandwidth 2√ln2/τ_p (rad/fs).
    pub omega_p: f64,
    /// Central signal detuning (rad/fs).
    pub omega_s: f64,
}

/// Bound on |Ω₊| below which the quadratic Ω₊² term of Δ is negligible:
/// 4|k′_p0 − k′0| / |2k″_p0 − k″0| (rad/fs).
pub fn group_velocity_bound(crystal: &CrystalConfig, pump: &PumpConfig) -> Result<f64> {
    let c = central_dispersion(crystal, pump)?;
    Ok(4.0 * (c.kp1 - c.k1).abs() / (2.0 * c.kp2 - c.k2).abs())
}

pub fn characteristic_times(crystal: &CrystalConfig, pump: &PumpConfig) -> Result<CharacteristicTimes> {
    crystal.validate()?;
    pump.validate()?;
    let c = central_dispersion(crystal, pump)?;
    let l = crystal.length_mm;
    let d0 = c.delta0();
    if !(d0 / c.k2 > 0.0) {
        return Err(Error::DegenerateCut(format!(
            "Δ0/k″0 = {:.4e} is not positive; use the numerical pipeline",
            d0 / c.k2
        )));
    }
    let omega_s = find_central_detuning(crystal, pump)?;
    if omega_s == 0.0 {
        return Err(Error::DegenerateCut("central detuning is zero; use the numerical pipeline".into()));
    }
    Ok(CharacteristicTimes {
        tau_pd: c.kp1 * l,
        tau_ps: (c.kp2 * l).sqrt(),
        tau_d: (c.kp1 - c.k1) * l,
        tau_s: (c.k2 * d0).sqrt() * l,
        omega_p: pump.bandwidth(),
        omega_s,
    })
}

/// Kernel `exp(−½(μ x² + ν y²) + (η + iξ) x y)` parameters (fs²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianModelParams {
    pub mu: f64,
    pub nu: f64,
    pub eta: f64,
    pub xi: f64,
}

impl GaussianModelParams {
    /// Square integrability: μ, ν > 0 and √(μν) > |η|.
    pub fn validate(&self) -> Result<()> {
        let ok = [self.mu, self.nu, self.eta, self.xi].iter().all(|x| x.is_finite())
            && self.mu > 0.0
            && self.nu > 0.0
            && (self.mu * self.nu).sqrt() > self.eta.abs();
        if ok {
            Ok(())
        } else {
            Err(Error::validation(
                "gaussian_model",
                format!(
                    "kernel not square integrable: mu={:.6e}, nu={:.6e}, eta={:.6e}, xi={:.6e}",
                    self.mu, self.nu, self.eta, self.xi
                ),
            ))
        }
    }

    /// Rescaled (η′, ξ′) = (η, ξ)/√(μν).
    pub fn primed(&self) -> (f64, f64) {
        let s = (self.mu * self.nu).sqrt();
        (self.eta / s, self.xi / s)
    }
}

pub fn gaussian_model_params(t: &CharacteristicTimes) -> Result<GaussianModelParams> {
    let inv = 1.0 / (t.omega_p * t.omega_p);
    let s2 = 4.0 * SIGMA0 * SIGMA0;
    let p = GaussianModelParams {
        mu: inv + (t.tau_d - t.tau_s).powi(2) / s2,
        nu: inv + (t.tau_d + t.tau_s).powi(2) / s2,
        eta: -inv - (t.tau_d * t.tau_d - t.tau_s * t.tau_s) / s2,
        xi: 0.5 * t.tau_ps * t.tau_ps,
    };
    p.validate()?;
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MehlerFactors {
    pub tau1: f64,
    pub tau2: f64,
    /// Chirp of the symmetric (rescaled) kernel.
    pub zeta: f64,
    pub zeta1: f64,
    pub zeta2: f64,
    pub q: f64,
    pub p: f64,
    pub theta0: f64,
    pub theta: f64,
    /// Hilbert-Schmidt norm 1/√v of the physical kernel.
    pub norm: f64,
    pub u: f64,
    pub v: f64,
    /// Rescaled parameters η′, ξ′ and w = √((1+ξ′²)(1−η′²)).
    pub eta_p: f64,
    pub xi_p: f64,
    pub w: f64,
}

impl MehlerFactors {
    /// `q_c = (η′ + iξ′)/(1 + w + iη′ξ′)`.
    pub fn q_c(&self) -> Complex64 {
        Complex64::new(self.eta_p, self.xi_p) / Complex64::new(1.0 + self.w, self.eta_p * self.xi_p)
    }

    /// `p_c = √(2w/(1 + w + iη′ξ′))`, principal branch.
    pub fn p_c(&self) -> Complex64 {
        (Complex64::new(2.0 * self.w, 0.0) / Complex64::new(1.0 + self.w, self.eta_p * self.xi_p)).sqrt()
    }

    /// HS norm (1+ξ′²)^{1/4} of the rescaled kernel.
    pub fn primed_norm(&self) -> f64 {
        (1.0 + self.xi_p * self.xi_p).powf(0.25)
    }

    /// θ_k = θ₀ + kθ reduced to (−π, π].
    pub fn theta_k(&self, k: usize) -> f64 {
        wrap_phase(self.theta0 + k as f64 * self.theta)
    }

    /// k-th singular value `norm · p · q^k` of the physical kernel.
    pub fn singular_value(&self, k: usize) -> f64 {
        self.norm * self.p * self.q.powi(k as i32)
    }
}

fn wrap_phase(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y <= -PI {
        y += 2.0 * PI;
    } else if y > PI {
        y -= 2.0 * PI;
    }
    y
}

pub fn mehler_factors(g: &GaussianModelParams) -> Result<MehlerFactors> {
    g.validate()?;
    let (mu, nu, eta, xi) = (g.mu, g.nu, g.eta, g.xi);
    let u = (mu * nu + xi * xi).sqrt();
    let v = (mu * nu - eta * eta).sqrt();
    if !(u >= v) {
        return Err(Error::Convergence { algorithm: "mehler_factors", residual: v - u });
    }
    let q = ((u - v) / (u + v)).sqrt();
    let (eta_p, xi_p) = g.primed();
    let w = ((1.0 + xi_p * xi_p) * (1.0 - eta_p * eta_p)).sqrt();
    let mut f = MehlerFactors {
        tau1: (u * v / nu).sqrt(),
        tau2: (u * v / mu).sqrt(),
        zeta: eta * xi / (2.0 * u * v),
        zeta1: xi * (nu + eta) / (2.0 * u * v),
        zeta2: xi * (mu + eta) / (2.0 * u * v),
        q,
        p: (1.0 - q * q).sqrt(),
        theta0: 0.0,
        theta: 0.0,
        norm: 1.0 / v.sqrt(),
        u,
        v,
        eta_p,
        xi_p,
        w,
    };
    let (qc, pc) = (f.q_c(), f.p_c());
    f.theta0 = wrap_phase(pc.arg());
    f.theta = wrap_phase(qc.arg());
    let dev = (qc.norm() - f.q).abs().max((pc.norm() - f.p * f.primed_norm()).abs());
    if dev > 1e-10 {
        return Err(Error::Convergence { algorithm: "mehler_factors", residual: dev });
    }
    Ok(f)
}

/// Rescaled kernel `π^{−1/2} exp(−(x² + y²)/(2w) + (η′ + iξ′) x y / w)`.
pub fn evaluate_kernel_lhs(g: &GaussianModelParams, x: f64, y: f64) -> Complex64 {
    let (eta, xi) = g.primed();
    let w = ((1.0 + xi * xi) * (1.0 - eta * eta)).sqrt();
    let e = Complex64::new(-(x * x + y * y) / (2.0 * w) + eta * x * y / w, xi * x * y / w);
    e.exp() / PI.sqrt()
}

/// Partial sum `(1+ξ′²)^{1/4} p e^{iθ₀} Σ_{k<terms} (q e^{iθ})^k h_k(x) h_k(y) e^{iζ(x²+y²)}`
/// together with the tail bound `(1+ξ′²)^{1/4} p q^terms / (1 − q) / √π`
/// (from |h_k| ≤ π^{−1/4}).
pub fn evaluate_kernel_sum(f: &MehlerFactors, x: f64, y: f64, terms: usize) -> (Complex64, f64) {
    let hx = hermite_gauss_all(terms, x);
    let hy = hermite_gauss_all(terms, y);
    let ratio = Complex64::from_polar(f.q, f.theta);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0);
    for k in 0..terms {
        acc += pow * hx[k] * hy[k];
        pow *= ratio;
    }
    let pref = Complex64::from_polar(f.primed_norm() * f.p, f.theta0);
    let chirp = Complex64::from_polar(1.0, f.zeta * (x * x + y * y));
    let bound = if f.q < 1.0 {
        f.primed_norm() * f.p * f.q.powi(terms as i32) / (1.0 - f.q) / PI.sqrt()
    } else {
        f64::INFINITY
    };
    (pref * acc * chirp, bound)
}

/// Physical kernel `π^{−1/2} exp(−½(μ x² + ν y²) + (η + iξ) x y)` in detunings.
pub fn evaluate_physical_kernel(g: &GaussianModelParams, x: f64, y: f64) -> Complex64 {
    Complex64::new(-0.5 * (g.mu * x * x + g.nu * y * y) + g.eta * x * y, g.xi * x * y).exp() / PI.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeBranch {
    Signal,
    Idler,
}

/// Time frame of the analytic modes. `DelayFree` drops the pump group-delay
/// phase, matching a pump whose linear spectral phase has been removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeFrame {
    Delayed,
    DelayFree,
}

/// Chirped Hermite-Gauss Schmidt mode sampled on `detunings` and normalized
/// so that `Σ |v|² · spacing = 1`.
///
/// Signal: `√τ₁ h_k(τ₁δΩ) e^{iτ_pd δΩ/2 + iζ₁τ₁²δΩ²}` with `δΩ = Ω − Ω_s`;
/// idler: `√τ₂ h_k(τ₂δΩ) e^{−iτ_pd δΩ/2 − iζ₂τ₂²δΩ²}` with `δΩ = Ω + Ω_s`.
pub fn analytic_schmidt_mode(
    k: usize,
    branch: ModeBranch,
    f: &MehlerFactors,
    t: &CharacteristicTimes,
    detunings: &[f64],
    spacing: f64,
    frame: ModeFrame,
) -> CVec {
    let delay = if frame == ModeFrame::Delayed { t.tau_pd } else { 0.0 };
    let (center, tau, zeta, sign) = match branch {
        ModeBranch::Signal => (t.omega_s, f.tau1, f.zeta1, 1.0),
        ModeBranch::Idler => (-t.omega_s, f.tau2, f.zeta2, -1.0),
    };
    let mut v = CVec::from_iterator(
        detunings.len(),
        detunings.iter().map(|&w| {
            let d = w - center;
            let amp = tau.sqrt() * hermite_gauss_all(k + 1, tau * d)[k];
            Complex64::from_polar(amp, sign * (0.5 * delay * d + zeta * tau * tau * d * d))
        }),
    );
    normalize_on_grid(&mut v, spacing);
    v
}

/// Scale so that `Σ |v|² · spacing = 1`; zero vectors are left alone.
pub fn normalize_on_grid(v: &mut CVec, spacing: f64) {
    let norm = (v.norm_squared() * spacing).sqrt();
    if norm > 0.0 {
        *v /= Complex64::new(norm, 0.0);
    }
}

/// Discrete inner product `Σ a* b · spacing`.
pub fn mode_overlap(a: &CVec, b: &CVec, spacing: f64) -> Result<Complex64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    Ok(a.dotc(b) * spacing)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bbo_factors(l: f64) -> (CharacteristicTimes, MehlerFactors) {
        let cr = CrystalConfig::bbo(l, 28.81);
        let p = PumpConfig::new(397.5, 129.0);
        let t = characteristic_times(&cr, &p).unwrap();
        let f = mehler_factors(&gaussian_model_params(&t).unwrap()).unwrap();
        (t, f)
    }

    #[test]
    fn hermite_values() {
        assert!((hermite_gauss(0, 0.0).unwrap() - PI.powf(-0.25)).abs() < 1e-15);
        assert!((hermite_gauss(0, 0.0).unwrap() - 0.7511).abs() < 1e-4);
        assert_eq!(hermite_gauss(1, 0.0).unwrap(), 0.0);
        assert!(hermite_gauss(MAX_ORDER + 1, 0.0).is_err());
        // h_2(x) = (2x² − 1) π^{-1/4} e^{-x²/2} / √2
        let x = 0.7f64;
        let want = (2.0 * x * x - 1.0) * PI.powf(-0.25) * (-0.5 * x * x).exp() / 2f64.sqrt();
        assert!((hermite_gauss(2, x).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn hermite_orthonormal_by_quadrature() {
        let n = 4001;
        let (a, b) = (-12.0, 12.0);
        let dx = (b - a) / (n - 1) as f64;
        let table: Vec<Vec<f64>> = (0..n).map(|i| hermite_gauss_all(11, a + i as f64 * dx)).collect();
        for k in 0..=10 {
            for l in 0..=10 {
                let s: f64 = table.iter().map(|h| h[k] * h[l]).sum::<f64>() * dx;
                let want = if k == l { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-8, "{k} {l} {s}");
            }
        }
    }

    #[test]
    fn rank_one_limit() {
        let t = CharacteristicTimes { tau_pd: 0.0, tau_ps: 0.0, tau_d: 0.0, tau_s: 0.0, omega_p: 0.02, omega_s: 0.3 };
        let g = GaussianModelParams { mu: 2500.0, nu: 2500.0, eta: -2500.0, xi: 0.0 };
        let got = gaussian_model_params(&t);
        // exactly rank one: √(μν) = |η| is rejected
        assert!(got.is_err());
        assert!(g.validate().is_err());
    }

    #[test]
    fn real_limit() {
        for eta in [0.8f64, -0.8] {
            let mu = (1.0 + eta * eta).sqrt();
            let f = mehler_factors(&GaussianModelParams { mu, nu: mu, eta, xi: 0.0 }).unwrap();
            assert!((f.tau1 - f.tau2).abs() < 1e-15);
            assert_eq!(f.zeta, 0.0);
            for k in 0..6 {
                let want = wrap_phase(PI * k as f64 * (1.0 - eta.signum()) / 2.0);
                assert!((f.theta_k(k) - want).abs() < 1e-12 || (f.theta_k(k).abs() - PI).abs() < 1e-12 && (want.abs() - PI).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bbo_reference_values() {
        let (t, f) = bbo_factors(2.0);
        assert!((f.tau1 - 48.0).abs() < 2.0, "{}", f.tau1);
        assert!((f.tau2 - 60.0).abs() < 2.0, "{}", f.tau2);
        assert!((f.q - 0.8681).abs() < 0.005, "{}", f.q);
        assert!((f.zeta1 - 0.0086).abs() < 0.001, "{}", f.zeta1);
        assert!((f.zeta2 + 0.0063).abs() < 0.001, "{}", f.zeta2);
        assert!(gaussian_model_params(&t).unwrap().eta < 0.0);
        assert!((f.p * f.p + f.q * f.q - 1.0).abs() < 1e-12);
        assert!(((f.p_c() * f.p_c() + f.q_c() * f.q_c()).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn physical_and_primed_routes_agree() {
        let (_, f) = bbo_factors(2.0);
        let q0 = f.w / (1.0 + f.xi_p * f.xi_p);
        let q_primed = ((1.0 - q0) / (1.0 + q0)).sqrt();
        assert!((q_primed - f.q).abs() < 1e-12);
        let (mu, nu) = (f.u * f.v / f.tau2.powi(2), f.u * f.v / f.tau1.powi(2));
        assert!((f.u * f.v / (mu * nu) - f.w).abs() < 1e-12 * f.w);
        assert!(((f.tau1 * f.tau2 / f.v).sqrt() - f.primed_norm()).abs() < 1e-12);
    }

    #[test]
    fn sum_matches_kernel_small_q() {
        let g = GaussianModelParams { mu: 1.3, nu: 0.9, eta: 0.4, xi: 0.3 };
        let f = mehler_factors(&g).unwrap();
        for &(x, y) in &[(0.0, 0.0), (0.5, -1.2), (2.0, 1.5)] {
            let (s, _) = evaluate_kernel_sum(&f, x, y, 60);
            assert!((s - evaluate_kernel_lhs(&g, x, y)).norm() < 1e-13);
        }
        // symmetric kernel
        assert_eq!(evaluate_kernel_lhs(&g, 0.3, 1.1), evaluate_kernel_lhs(&g, 1.1, 0.3));
    }

    #[test]
    fn q_zero_single_term() {
        let g = GaussianModelParams { mu: 2.0, nu: 0.5, eta: 0.0, xi: 0.0 };
        let f = mehler_factors(&g).unwrap();
        assert_eq!(f.q, 0.0);
        let (s, _) = evaluate_kernel_sum(&f, 0.7, -0.4, 1);
        assert!((s - evaluate_kernel_lhs(&g, 0.7, -0.4)).norm() < 1e-15);
    }

    #[test]
    fn spec_prefactor_is_pc_qc_power() {
        let g = GaussianModelParams { mu: 1.0, nu: 2.0, eta: -0.9, xi: 1.7 };
        let f = mehler_factors(&g).unwrap();
        let lhs = Complex64::from_polar(f.primed_norm() * f.p, f.theta0) * Complex64::from_polar(f.q, f.theta).powi(3);
        let rhs = f.p_c() * f.q_c().powi(3);
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn chirped_modes_orthonormal() {
        let (t, f) = bbo_factors(2.0);
        let h = 2e-4;
        let grid: Vec<f64> = (0..6001).map(|i| t.omega_s - 0.6 + i as f64 * h).collect();
        let modes: Vec<CVec> = (0..=20)
            .map(|k| analytic_schmidt_mode(k, ModeBranch::Signal, &f, &t, &grid, h, ModeFrame::Delayed))
            .collect();
        for k in 0..=20 {
            for l in 0..=20 {
                let o = mode_overlap(&modes[k], &modes[l], h).unwrap();
                let want = if k == l { 1.0 } else { 0.0 };
                assert!((o.norm() - want).abs() < 1e-8, "{k} {l} {}", o.norm());
            }
        }
    }

    #[test]
    fn overlap_properties() {
        let (t, f) = bbo_factors(2.0);
        let h = 1e-3;
        let grid: Vec<f64> = (0..1201).map(|i| -t.omega_s - 0.6 + i as f64 * h).collect();
        let a = analytic_schmidt_mode(1, ModeBranch::Idler, &f, &t, &grid, h, ModeFrame::DelayFree);
        let b = &a * Complex64::from_polar(1.0, 0.9);
        assert!((mode_overlap(&a, &a, h).unwrap().norm() - 1.0).abs() < 1e-12);
        assert!((mode_overlap(&a, &b, h).unwrap().norm() - 1.0).abs() < 1e-12);
        assert!(mode_overlap(&a, &CVec::zeros(3), h).is_err());
    }

    #[test]
    fn chirp_phase_is_small() {
        let (_, f) = bbo_factors(2.0);
        // over ±3 mode widths the chirp phase stays far below π
        assert!(f.zeta1.abs() * 9.0 < 0.1 * PI);
    }

    #[test]
    fn degenerate_cut_is_rejected() {
        let cr = CrystalConfig::bbo(2.0, 29.6);
        let p = PumpConfig::new(397.5, 129.0);
        assert!(matches!(characteristic_times(&cr, &p), Err(Error::DegenerateCut(_)) | Err(Error::NoPhaseMatch(_))));
    }
}
