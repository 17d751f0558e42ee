//! Sellmeier dispersion of a uniaxial crystal and derivative-carrying arithmetic.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Speed of light in mm/fs.
pub const C_MM_PER_FS: f64 = 2.997_924_58e-4;
/// Speed of light in µm/fs.
pub const C_UM_PER_FS: f64 = 0.299_792_458;

/// Angular frequency (rad/fs) of a vacuum wavelength in nm.
pub fn omega_from_nm(lambda_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * C_UM_PER_FS * 1e3 / lambda_nm
}

/// Vacuum wavelength in nm of an angular frequency in rad/fs.
pub fn nm_from_omega(omega: f64) -> f64 {
    2.0 * std::f64::consts::PI * C_UM_PER_FS * 1e3 / omega
}

/// Value with first and second derivative, propagated through arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Jet { v, d1: 0.0, d2: 0.0 }
    }

    pub fn variable(v: f64) -> Self {
        Jet { v, d1: 1.0, d2: 0.0 }
    }

    /// Chain rule for a scalar function with derivatives `(f, f', f'')` at `self.v`.
    fn chain(self, f: f64, fp: f64, fpp: f64) -> Self {
        Jet { v: f, d1: fp * self.d1, d2: fpp * self.d1 * self.d1 + fp * self.d2 }
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2 }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet { v: -self.v, d1: -self.d1, d2: -self.d2 }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        Jet { v: self.v * s, d1: self.d1 * s, d2: self.d2 * s }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, s: f64) -> Jet {
        Jet { v: self.v + s, ..self }
    }
}

/// One principal axis: `n² = a + b/(λ² − c) − d·λ²` with λ in µm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sellmeier {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// Accepted wavelength range in µm.
    pub min_um: f64,
    pub max_um: f64,
}

impl Sellmeier {
    /// BBO ordinary axis.
    pub const BBO_O: Sellmeier =
        Sellmeier { a: 2.7405, b: 0.0184, c: 0.0179, d: 0.0155, min_um: 0.19, max_um: 2.6 };
    /// BBO extraordinary axis.
    pub const BBO_E: Sellmeier =
        Sellmeier { a: 2.3730, b: 0.0128, c: 0.0156, d: 0.0044, min_um: 0.19, max_um: 2.6 };

    pub fn check_range(&self, lambda_um: f64) -> Result<()> {
        if lambda_um.is_finite() && lambda_um >= self.min_um && lambda_um <= self.max_um {
            Ok(())
        } else {
            Err(Error::OutOfRange { lambda_um, min_um: self.min_um, max_um: self.max_um })
        }
    }

    /// n² as a jet in the wavelength variable carried by `lambda_um`.
    pub fn n_squared(&self, lambda_um: Jet) -> Jet {
        let l2 = lambda_um * lambda_um;
        (l2 + (-self.c)).recip() * self.b + l2 * (-self.d) + self.a
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        let finite = [self.a, self.b, self.c, self.d, self.min_um, self.max_um].iter().all(|x| x.is_finite());
        if !finite || self.min_um <= 0.0 || self.max_um <= self.min_um {
            return Err(Error::validation(field, "coefficients must be finite with 0 < min_um < max_um"));
        }
        if self.c >= self.min_um * self.min_um {
            return Err(Error::validation(field, "pole c lies inside the declared wavelength range"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarization {
    Ordinary,
    Extraordinary,
}

/// Index of a uniaxial crystal; the extraordinary wave at angle θ to the optic
/// axis sees `1/n² = cos²θ/n_o² + sin²θ/n_e²`.
pub fn refractive_index_jet(
    lambda_um: Jet,
    pol: Polarization,
    theta_deg: f64,
    o: &Sellmeier,
    e: &Sellmeier,
) -> Result<Jet> {
    o.check_range(lambda_um.v)?;
    let no2 = o.n_squared(lambda_um);
    match pol {
        Polarization::Ordinary => Ok(no2.sqrt()),
        Polarization::Extraordinary => {
            e.check_range(lambda_um.v)?;
            let ne2 = e.n_squared(lambda_um);
            let t = theta_deg.to_radians();
            let inv = no2.recip() * t.cos().powi(2) + ne2.recip() * t.sin().powi(2);
            Ok(inv.recip().sqrt())
        }
    }
}

pub fn refractive_index(
    lambda_um: f64,
    pol: Polarization,
    theta_deg: f64,
    o: &Sellmeier,
    e: &Sellmeier,
) -> Result<f64> {
    let n = refractive_index_jet(Jet::constant(lambda_um), pol, theta_deg, o, e)?.v;
    if !(n > 1.0) {
        return Err(Error::validation("sellmeier", format!("index {n} at {lambda_um} um is not above 1")));
    }
    Ok(n)
}

/// `k = n(ω) ω / c` in rad/mm, as a jet in ω (rad/fs).
pub fn wave_number_jet(
    omega: Jet,
    pol: Polarization,
    theta_deg: f64,
    o: &Sellmeier,
    e: &Sellmeier,
) -> Result<Jet> {
    let lambda = omega.recip() * (2.0 * std::f64::consts::PI * C_UM_PER_FS);
    let n = refractive_index_jet(lambda, pol, theta_deg, o, e)?;
    Ok(n * omega * (1.0 / C_MM_PER_FS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordinary_index_golden() {
        let n = refractive_index(0.6328, Polarization::Ordinary, 0.0, &Sellmeier::BBO_O, &Sellmeier::BBO_E).unwrap();
        // Default BBO set evaluated independently at 632.8 nm.
        assert!((n - 1.668_050_752_434_842_5).abs() < 1e-12, "{n}");
    }

    #[test]
    fn extraordinary_limits() {
        let (o, e) = (Sellmeier::BBO_O, Sellmeier::BBO_E);
        let no = refractive_index(0.5, Polarization::Ordinary, 0.0, &o, &e).unwrap();
        let e0 = refractive_index(0.5, Polarization::Extraordinary, 0.0, &o, &e).unwrap();
        let e90 = refractive_index(0.5, Polarization::Extraordinary, 90.0, &o, &e).unwrap();
        assert!((no - e0).abs() < 1e-15);
        assert!((e90 - e.n_squared(Jet::constant(0.5)).v.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_rejected() {
        let r = refractive_index(5.0, Polarization::Ordinary, 0.0, &Sellmeier::BBO_O, &Sellmeier::BBO_E);
        assert!(matches!(r, Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn jet_matches_finite_differences() {
        let (o, e) = (Sellmeier::BBO_O, Sellmeier::BBO_E);
        let f = |w: f64| wave_number_jet(Jet::constant(w), Polarization::Extraordinary, 28.81, &o, &e).unwrap().v;
        let w = 4.74;
        let j = wave_number_jet(Jet::variable(w), Polarization::Extraordinary, 28.81, &o, &e).unwrap();
        let h = 1e-3;
        let d1 = (f(w + h) - f(w - h)) / (2.0 * h);
        let d2 = (f(w + h) - 2.0 * f(w) + f(w - h)) / (h * h);
        assert!(((j.d1 - d1) / d1).abs() < 1e-6);
        assert!(((j.d2 - d2) / d2).abs() < 1e-4);
    }

    #[test]
    fn jet_arithmetic() {
        let x = Jet::variable(2.0);
        let y = (x * x * x).sqrt() / x; // x^{1/2}
        assert!((y.v - 2f64.sqrt()).abs() < 1e-15);
        assert!((y.d1 - 0.5 / 2f64.sqrt()).abs() < 1e-15);
        assert!((y.d2 + 0.25 * 2f64.powf(-1.5)).abs() < 1e-15);
    }
}
