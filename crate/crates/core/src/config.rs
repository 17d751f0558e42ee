//! Run configuration read from TOML.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::pdc::{CrystalConfig, PumpConfig};

fn default_m() -> usize {
    256
}
fn default_pairing_tol() -> f64 {
    1e-2
}
fn default_terms() -> usize {
    80
}
fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PipelineKind {
    #[default]
    Numerical,
    Analytic,
    Compare,
    NearDegenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    #[default]
    Both,
}

impl OutputFormat {
    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "both" => Ok(OutputFormat::Both),
            _ => Err(Error::validation("output.format", format!("unknown format {s:?}"))),
        }
    }
}

/// Frequency grid: `m` points per band over `[−half_width, half_width]`.
/// Without `half_width` the band edge is chosen from the phase-matching
/// geometry; without `window` it follows from `T = 2πm/half_width`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { m: default_m(), half_width: None, window: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_dir(), format: OutputFormat::Both }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub crystal: CrystalConfig,
    pub pump: PumpConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub pipeline: PipelineKind,
    #[serde(default = "default_pairing_tol")]
    pub pairing_tol: f64,
    /// Terms of the Mehler series used in analytic checks.
    #[serde(default = "default_terms")]
    pub mehler_terms: usize,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn new(crystal: CrystalConfig, pump: PumpConfig) -> Self {
        RunConfig {
            crystal,
            pump,
            grid: GridConfig::default(),
            pipeline: PipelineKind::default(),
            pairing_tol: default_pairing_tol(),
            mehler_terms: default_terms(),
            output: OutputConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.crystal.validate()?;
        self.pump.validate()?;
        if self.grid.m < 2 {
            return Err(Error::validation("grid.m", "must be at least 2"));
        }
        if let Some(h) = self.grid.half_width {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::validation("grid.half_width", "must be positive"));
            }
            if h >= self.pump.omega0() {
                return Err(Error::validation("grid.half_width", "must stay below the degenerate frequency"));
            }
        }
        if let Some(t) = self.grid.window {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::validation("grid.window", "must be positive"));
            }
            if self.grid.half_width.is_none() {
                return Err(Error::validation("grid.window", "requires grid.half_width"));
            }
        }
        if !(self.pairing_tol > 0.0 && self.pairing_tol < 1.0) {
            return Err(Error::validation("pairing_tol", "must lie in (0, 1)"));
        }
        if self.mehler_terms == 0 || self.mehler_terms > crate::mehler::MAX_ORDER {
            return Err(Error::validation("mehler_terms", "must lie in 1..=10000"));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Parse and validate a TOML document.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        match e.span() {
            Some(span) => {
                let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
                Error::Parse(format!("line {line}: {msg}"))
            }
            None => Error::Parse(msg),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[crystal]\nlength_mm = 2.0\ntheta0_deg = 28.81\n\n[pump]\nlambda_p_nm = 397.5\ntau_p_fs = 129.0\n";

    #[test]
    fn defaults() {
        let c = parse_config_str(MINIMAL).unwrap();
        assert_eq!(c.pump.z0_fraction, 0.5);
        assert!(c.pump.prechirp_compensated);
        assert_eq!(c.pairing_tol, 1e-2);
        assert_eq!(c.pipeline, PipelineKind::Numerical);
        assert_eq!(c.crystal.sellmeier_o, crate::dispersion::Sellmeier::BBO_O);
    }

    #[test]
    fn rejects_bad_angle() {
        let e = parse_config_str(&MINIMAL.replace("28.81", "120")).unwrap_err();
        assert!(matches!(e, Error::Validation { ref field, .. } if field == "crystal.theta0_deg"), "{e}");
    }

    #[test]
    fn rejects_unknown_key_with_line() {
        let e = parse_config_str(&format!("{MINIMAL}colour = 3\n")).unwrap_err();
        assert!(matches!(e, Error::Parse(ref m) if m.contains("line")), "{e}");
        assert!(parse_config_str("[crystal]\nlength_mm = 2\ntheta0_deg = 28\nfoo = 1\n[pump]\nlambda_p_nm=400\ntau_p_fs=100\n").is_err());
    }

    #[test]
    fn round_trip() {
        let mut c = parse_config_str(MINIMAL).unwrap();
        c.grid.half_width = Some(0.7);
        let text = c.to_toml().unwrap();
        let back = parse_config_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_toml().unwrap(), text);
    }

    #[test]
    fn window_needs_half_width() {
        let e = parse_config_str(&format!("{MINIMAL}[grid]\nwindow = 100.0\n")).unwrap_err();
        assert!(matches!(e, Error::Validation { .. }));
    }
}
