//! First-order squeezing matrix of collinear type-I downconversion.
//!
//! Detunings are in rad/fs, lengths in mm and wave numbers in rad/mm. The
//! pump is extraordinary at the cut angle, signal and idler are ordinary.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::{omega_from_nm, wave_number_jet, Jet, Polarization, Sellmeier};
use crate::error::{Error, Result};
use crate::linalg::{block, frobenius, max_abs, CMat};
use crate::twinbeam::JointSpectralAmplitude;

fn default_sellmeier_o() -> Sellmeier {
    Sellmeier::BBO_O
}
fn default_sellmeier_e() -> Sellmeier {
    Sellmeier::BBO_E
}
fn default_gain() -> f64 {
    1.0
}
fn default_z0() -> f64 {
    0.5
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalConfig {
    pub length_mm: f64,
    pub theta0_deg: f64,
    #[serde(default = "default_sellmeier_o")]
    pub sellmeier_o: Sellmeier,
    #[serde(default = "default_sellmeier_e")]
    pub sellmeier_e: Sellmeier,
}

impl CrystalConfig {
    pub fn bbo(length_mm: f64, theta0_deg: f64) -> Self {
        CrystalConfig { length_mm, theta0_deg, sellmeier_o: Sellmeier::BBO_O, sellmeier_e: Sellmeier::BBO_E }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_mm > 0.0) || !self.length_mm.is_finite() {
            return Err(Error::validation("crystal.length_mm", "must be a positive length"));
        }
        if !(self.theta0_deg > 0.0 && self.theta0_deg < 90.0) {
            return Err(Error::validation("crystal.theta0_deg", format!("{} is outside (0, 90)", self.theta0_deg)));
        }
        self.sellmeier_o.validate("crystal.sellmeier_o")?;
        self.sellmeier_e.validate("crystal.sellmeier_e")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PumpConfig {
    pub lambda_p_nm: f64,
    /// Intensity FWHM duration.
    pub tau_p_fs: f64,
    #[serde(default = "default_gain")]
    pub gain: f64,
    /// Interaction-picture origin as a fraction of the crystal length.
    #[serde(default = "default_z0")]
    pub z0_fraction: f64,
    /// True when the pump is transform limited at z₀ (no spectral phase there).
    #[serde(default = "default_true")]
    pub prechirp_compensated: bool,
}

impl PumpConfig {
    pub fn new(lambda_p_nm: f64, tau_p_fs: f64) -> Self {
        PumpConfig { lambda_p_nm, tau_p_fs, gain: 1.0, z0_fraction: 0.5, prechirp_compensated: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_p_nm > 0.0) || !self.lambda_p_nm.is_finite() {
            return Err(Error::validation("pump.lambda_p_nm", "must be positive"));
        }
        if !(self.tau_p_fs > 0.0) || !self.tau_p_fs.is_finite() {
            return Err(Error::validation("pump.tau_p_fs", "must be positive"));
        }
        if !(self.gain >= 0.0) || !self.gain.is_finite() {
            return Err(Error::validation("pump.gain", "must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.z0_fraction) {
            return Err(Error::validation("pump.z0_fraction", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Central pump frequency ω_p (rad/fs).
    pub fn omega_p(&self) -> f64 {
        omega_from_nm(self.lambda_p_nm)
    }

    /// Degenerate frequency ω₀ = ω_p/2.
    pub fn omega0(&self) -> f64 {
        0.5 * self.omega_p()
    }

    /// Spectral amplitude width Ω_p = 2√ln2/τ_p.
    pub fn bandwidth(&self) -> f64 {
        2.0 * std::f64::consts::LN_2.sqrt() / self.tau_p_fs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Pump,
    Downconverted,
}

pub fn wave_vector_jet(detuning: Jet, branch: Branch, crystal: &CrystalConfig, pump: &PumpConfig) -> Result<Jet> {
    let (center, pol) = match branch {
        Branch::Pump => (pump.omega_p(), Polarization::Extraordinary),
        Branch::Downconverted => (pump.omega0(), Polarization::Ordinary),
    };
    wave_number_jet(detuning + center, pol, crystal.theta0_deg, &crystal.sellmeier_o, &crystal.sellmeier_e)
}

/// k(Ω) in rad/mm for a detuning from ω_p (pump) or ω₀ (downconverted light).
pub fn wave_vector(detuning: f64, branch: Branch, crystal: &CrystalConfig, pump: &PumpConfig) -> Result<f64> {
    Ok(wave_vector_jet(Jet::constant(detuning), branch, crystal, pump)?.v)
}

/// Δ = k_p(Ω_j + Ω_l) − k(Ω_j) − k(Ω_l).
pub fn phase_mismatch(omega_j: f64, omega_l: f64, crystal: &CrystalConfig, pump: &PumpConfig) -> Result<f64> {
    let kp = wave_vector(omega_j + omega_l, Branch::Pump, crystal, pump)?;
    let kj = wave_vector(omega_j, Branch::Downconverted, crystal, pump)?;
    let kl = wave_vector(omega_l, Branch::Downconverted, crystal, pump)?;
    Ok(kp - kj - kl)
}

/// Values and first two derivatives of k_p at ω_p and of k at ω₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralDispersion {
    pub kp0: f64,
    pub kp1: f64,
    pub kp2: f64,
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
}

impl CentralDispersion {
    pub fn delta0(&self) -> f64 {
        self.kp0 - 2.0 * self.k0
    }

    /// Quadratic expansion of Δ(Ω₁, Ω₂) around the degenerate point.
    pub fn quadratic_mismatch(&self, o1: f64, o2: f64) -> f64 {
        let plus = o1 + o2;
        let minus = o1 - o2;
        self.delta0() + (self.kp1 - self.k1) * plus + 0.25 * (2.0 * self.kp2 - self.k2) * plus * plus
            - 0.25 * self.k2 * minus * minus
    }
}

pub fn central_dispersion(crystal: &CrystalConfig, pump: &PumpConfig) -> Result<CentralDispersion> {
    let p = wave_vector_jet(Jet::variable(0.0), Branch::Pump, crystal, pump)?;
    let d = wave_vector_jet(Jet::variable(0.0), Branch::Downconverted, crystal, pump)?;
    Ok(CentralDispersion { kp0: p.v, kp1: p.d1, kp2: p.d2, k0: d.v, k1: d.d1, k2: d.d2 })
}

/// Pump spectral amplitude at z₀, normalized to a unit peak.
///
/// Without prechirp compensation the pump is transform limited at the input
/// face and picks up `k_p(Ω₊) z₀`; the constant and group-delay parts of that
/// phase are dropped.
pub fn pump_spectrum(sum_detuning: f64, pump: &PumpConfig, crystal: &CrystalConfig) -> Result<Complex64> {
    let op = pump.bandwidth();
    let amp = (-sum_detuning * sum_detuning / (2.0 * op * op)).exp();
    if pump.prechirp_compensated {
        return Ok(Complex64::new(amp, 0.0));
    }
    let c = central_dispersion(crystal, pump)?;
    let kp = wave_vector(sum_detuning, Branch::Pump, crystal, pump)?;
    Ok(Complex64::from_polar(amp, pump_phase(kp, sum_detuning, &c, pump, crystal)))
}

fn pump_phase(kp: f64, sum_detuning: f64, c: &CentralDispersion, pump: &PumpConfig, crystal: &CrystalConfig) -> f64 {
    let z0 = pump.z0_fraction * crystal.length_mm;
    (kp - c.kp0 - c.kp1 * sum_detuning) * z0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub m: usize,
    pub half_width: f64,
    pub spacing: f64,
    /// Ω_l = (l − m − ½)·spacing for l = 1..2m; idler half first.
    pub detunings: Vec<f64>,
}

impl FrequencyGrid {
    /// Grid whose window is chosen as T = 2πm/ΔΩ.
    pub fn with_half_width(m: usize, half_width: f64) -> Result<Self> {
        build_frequency_grid(m, half_width, 2.0 * std::f64::consts::PI * m as f64 / half_width)
    }

    pub fn n(&self) -> usize {
        2 * self.m
    }
    pub fn idler(&self) -> &[f64] {
        &self.detunings[..self.m]
    }
    pub fn signal(&self) -> &[f64] {
        &self.detunings[self.m..]
    }
}

pub fn build_frequency_grid(m: usize, half_width: f64, window: f64) -> Result<FrequencyGrid> {
    if m == 0 {
        return Err(Error::validation("grid.m", "must be at least 1"));
    }
    if !(window > 0.0) || !(half_width > 0.0) {
        return Err(Error::validation("grid", "half-width and window must be positive"));
    }
    let spacing = 2.0 * std::f64::consts::PI / window;
    if (m as f64 * spacing - half_width).abs() > spacing * (1.0 + 1e-12) {
        return Err(Error::validation(
            "grid",
            format!("m·2π/T = {} disagrees with half_width {} by more than one step", m as f64 * spacing, half_width),
        ));
    }
    let detunings = (1..=2 * m).map(|l| (l as f64 - m as f64 - 0.5) * spacing).collect();
    Ok(FrequencyGrid { m, half_width, spacing, detunings })
}

#[derive(Debug, Clone)]
pub struct SqueezingMatrixPhysical {
    pub grid: FrequencyGrid,
    /// Symmetric 2m×2m Γ in grid order.
    pub gamma: CMat,
    /// Phase removed from the raw −iH_I (rad).
    pub removed_phase: f64,
}

pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Γ_jl = −i·h·g·E(Ω_j+Ω_l)·e^{iΔ(L/2−z₀)}·sinc(ΔL/2), then rotated by the
/// phase of its largest element and symmetrized.
pub fn build_squeezing_matrix(
    crystal: &CrystalConfig,
    pump: &PumpConfig,
    grid: &FrequencyGrid,
) -> Result<SqueezingMatrixPhysical> {
    crystal.validate()?;
    pump.validate()?;
    let n = grid.n();
    let h = grid.spacing;
    let len = crystal.length_mm;
    let z0 = pump.z0_fraction * len;
    let c = central_dispersion(crystal, pump)?;

    // Sums Ω_j + Ω_l = (j + l − 2m − 1)h take 4m − 1 distinct values.
    let sums: Vec<f64> = (0..2 * n - 1).map(|s| (s as f64 - (n as f64 - 1.0)) * h).collect();
    let kp = sums
        .iter()
        .map(|&w| wave_vector(w, Branch::Pump, crystal, pump))
        .collect::<Result<Vec<_>>>()?;
    let pump_amp: Vec<Complex64> = sums
        .iter()
        .zip(&kp)
        .map(|(&w, &k)| {
            let op = pump.bandwidth();
            let amp = (-w * w / (2.0 * op * op)).exp();
            let phase = if pump.prechirp_compensated { 0.0 } else { pump_phase(k, w, &c, pump, crystal) };
            Complex64::from_polar(amp, phase)
        })
        .collect();
    let k = grid
        .detunings
        .iter()
        .map(|&w| wave_vector(w, Branch::Downconverted, crystal, pump))
        .collect::<Result<Vec<_>>>()?;

    let scale = Complex64::new(0.0, -h * pump.gain);
    let mut gamma = CMat::zeros(n, n);
    gamma.as_mut_slice().par_chunks_mut(n).enumerate().for_each(|(l, col)| {
        for (j, out) in col.iter_mut().enumerate() {
            let s = j + l;
            let delta = kp[s] - k[j] - k[l];
            let prop = Complex64::from_polar(sinc(0.5 * delta * len), delta * (0.5 * len - z0));
            *out = scale * pump_amp[s] * prop;
        }
    });

    let big = gamma.iter().copied().fold(Complex64::new(0.0, 0.0), |a, z| if z.norm() > a.norm() { z } else { a });
    let removed_phase = if big.norm() > 0.0 { big.arg() } else { 0.0 };
    let rot = Complex64::from_polar(1.0, -removed_phase);
    let gamma = gamma.map(|z| z * rot);
    let gamma = (&gamma + gamma.transpose()) * Complex64::new(0.5, 0.0);
    Ok(SqueezingMatrixPhysical { grid: grid.clone(), gamma, removed_phase })
}

/// Diagonal-block leakage above which the bands count as not separated.
pub const LEAKAGE_FLAG: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct JsaExtraction {
    pub jsa: JointSpectralAmplitude,
    /// ‖diagonal blocks‖_F / ‖Γ‖_F.
    pub leakage: f64,
    /// True when `leakage` exceeds [`LEAKAGE_FLAG`].
    pub flagged: bool,
}

/// Signal × idler block of Γ together with the weight left in the
/// signal-signal and idler-idler blocks.
pub fn extract_jsa(sq: &SqueezingMatrixPhysical) -> JsaExtraction {
    let m = sq.grid.m;
    let j = block(&sq.gamma, 1, 0, m);
    let total = frobenius(&sq.gamma);
    let diag = frobenius(&block(&sq.gamma, 0, 0, m)).hypot(frobenius(&block(&sq.gamma, 1, 1, m)));
    let leakage = if total > 0.0 { diag / total } else { 0.0 };
    let jsa = JointSpectralAmplitude {
        j_matrix: j,
        signal_grid: sq.grid.signal().to_vec(),
        idler_grid: sq.grid.idler().to_vec(),
    };
    JsaExtraction { jsa, leakage, flagged: leakage > LEAKAGE_FLAG }
}

/// Bisection root of `f` on a bracketing interval.
pub fn bisect<F: Fn(f64) -> Result<f64>>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = f(lo)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Smallest Ω ≥ 0 with Δ(Ω, −Ω) = 0, found by scanning and bisection on the
/// exact dispersion.
pub fn find_central_detuning(crystal: &CrystalConfig, pump: &PumpConfig) -> Result<f64> {
    let c = central_dispersion(crystal, pump)?;
    let f = |w: f64| -> Result<f64> {
        Ok(c.kp0
            - wave_vector(w, Branch::Downconverted, crystal, pump)?
            - wave_vector(-w, Branch::Downconverted, crystal, pump)?)
    };
    let d0 = c.delta0();
    if d0.abs() <= 1e-12 * c.kp0 {
        return Ok(0.0);
    }
    // Stay inside the Sellmeier range on the idler (low-frequency) side.
    let w0 = pump.omega0();
    let omega_min = crate::dispersion::omega_from_nm(crystal.sellmeier_o.max_um * 1e3);
    let limit = (w0 - omega_min).min(0.95 * w0);
    let steps = 2000;
    let mut prev = (0.0, d0);
    for i in 1..=steps {
        let w = limit * i as f64 / steps as f64;
        let v = f(w)?;
        if v == 0.0 {
            return Ok(w);
        }
        if (v < 0.0) != (prev.1 < 0.0) {
            return bisect(f, prev.0, w);
        }
        prev = (w, v);
    }
    Err(Error::NoPhaseMatch(format!(
        "Δ(Ω, −Ω) keeps the sign of Δ₀ = {d0:.4e} rad/mm for 0 ≤ Ω ≤ {limit:.3} rad/fs"
    )))
}

/// Closed form √(Δ₀/k″₀) from the quadratic expansion.
pub fn central_detuning_closed_form(c: &CentralDispersion) -> Result<f64> {
    let ratio = c.delta0() / c.k2;
    if ratio < 0.0 {
        return Err(Error::NoPhaseMatch(format!("Δ₀/k″₀ = {ratio:.4e} is negative")));
    }
    Ok(ratio.sqrt())
}

/// max|Im Γ| relative to max|Γ|.
pub fn imaginary_max_fraction(gamma: &CMat) -> f64 {
    let m = max_abs(gamma);
    if m == 0.0 {
        0.0
    } else {
        gamma.iter().fold(0.0f64, |a, z| a.max(z.im.abs())) / m
    }
}
