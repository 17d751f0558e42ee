//! Config-driven runs: numerical spectrum, analytic model and their
//! comparison, with every reported number backed by an artifact.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::config::{OutputFormat, PipelineKind, RunConfig};
use crate::error::{Error, Result, StageExt};
use crate::export::{
    export_matrix_heatmap, export_spectrum_csv, export_spectrum_json, fmt_f64, write_csv, write_json, ManifestEntry,
};
use crate::linalg::{diag_real, imaginary_fraction, CVec};
use crate::mehler::{
    analytic_schmidt_mode, characteristic_times, evaluate_kernel_lhs, evaluate_kernel_sum, gaussian_model_params,
    group_velocity_bound, mehler_factors, mode_overlap, CharacteristicTimes, GaussianModelParams, MehlerFactors,
    ModeBranch, ModeFrame,
};
use crate::pdc::{
    build_frequency_grid, build_squeezing_matrix, extract_jsa, find_central_detuning, CrystalConfig, FrequencyGrid,
    PumpConfig, SqueezingMatrixPhysical,
};
use crate::symplectic::{SymplecticMatrix, SYMPLECTIC_TOL};
use crate::takagi::{takagi, takagi_residual, DEFAULT_REAL_THRESHOLD};
use crate::twinbeam::{
    fit_geometric, geometric_schmidt_number, pair_eigenvalues, schmidt_from_jsa, schmidt_number, signal_weight,
    GeometricFit, PairingReport, SchmidtDecomposition, SqueezingSpectrum,
};

/// Reconstruction residual a run must meet.
pub const TAKAGI_TOL: f64 = 1e-10;
/// Leading pairs used for the geometric fit.
pub const FIT_PAIRS: usize = 15;
/// Leading values and modes written out.
pub const EXPORT_MODES: usize = 20;
/// Heatmaps are subsampled to at most this many rows and columns.
pub const HEATMAP_MAX: usize = 256;
/// Orders compared between analytic and numerical Schmidt modes.
pub const COMPARE_ORDERS: usize = 6;

/// Band edge used when the config leaves it open: the central detuning
/// plus eight analytic mode widths or six pump bandwidths, whichever is
/// wider. Without an analytic model, 0.3 rad/fs past the centre.
pub fn default_half_width(crystal: &CrystalConfig, pump: &PumpConfig) -> Result<f64> {
    let omega_s = find_central_detuning(crystal, pump).unwrap_or(0.0);
    let extra = characteristic_times(crystal, pump)
        .and_then(|t| Ok((t, mehler_factors(&gaussian_model_params(&t)?)?)))
        .map(|(t, f)| (8.0 / f.tau1).max(8.0 / f.tau2).max(6.0 * t.omega_p))
        .unwrap_or(0.3);
    Ok((omega_s + extra).min(0.95 * pump.omega0()))
}

pub fn resolve_grid(cfg: &RunConfig) -> Result<FrequencyGrid> {
    let hw = match cfg.grid.half_width {
        Some(h) => h,
        None => default_half_width(&cfg.crystal, &cfg.pump)?,
    };
    match cfg.grid.window {
        Some(t) => build_frequency_grid(cfg.grid.m, hw, t),
        None => FrequencyGrid::with_half_width(cfg.grid.m, hw),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub m: usize,
    pub half_width: f64,
    pub spacing: f64,
    pub window: f64,
}

impl From<&FrequencyGrid> for GridSummary {
    fn from(g: &FrequencyGrid) -> Self {
        GridSummary { m: g.m, half_width: g.half_width, spacing: g.spacing, window: 2.0 * std::f64::consts::PI / g.spacing }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericalSummary {
    pub omega_s: Option<f64>,
    /// True when Γ was real and the real symmetric Takagi path ran.
    pub real_path: bool,
    pub imaginary_fraction: f64,
    pub r1: f64,
    pub leading_values: Vec<f64>,
    pub fit: Option<GeometricFit>,
    pub k_s_raw: Option<f64>,
    /// `2(1 + q_fit)/(1 − q_fit)`.
    pub k_s_geometric: Option<f64>,
    pub pairing: PairingReport,
    pub leakage: f64,
    pub leakage_flagged: bool,
    /// Largest |w − ½| over the leading modes, w the signal-band weight.
    pub signal_weight_deviation: f64,
    pub schmidt_values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct NumericalRun {
    pub matrix: SqueezingMatrixPhysical,
    pub spectrum: SqueezingSpectrum,
    pub schmidt: SchmidtDecomposition,
    pub takagi_residual: f64,
    pub symplectic_residual: f64,
    pub summary: NumericalSummary,
}

impl NumericalRun {
    pub fn grid(&self) -> &FrequencyGrid {
        &self.matrix.grid
    }
}

/// `S = exp(−iKH)` for `H_I = iΓ` from the Takagi factors of Γ:
/// `S0 = V cosh R V†`, `SI = V sinh R Vᵀ`.
pub fn squeezer_from_spectrum(s: &SqueezingSpectrum) -> SymplecticMatrix {
    let v = &s.modes;
    let ch: Vec<f64> = s.values.iter().map(|r| r.cosh()).collect();
    let sh: Vec<f64> = s.values.iter().map(|r| r.sinh()).collect();
    let s0 = v * diag_real(&ch) * v.adjoint();
    let si = v * diag_real(&sh) * v.transpose();
    SymplecticMatrix::from_blocks_unchecked(s0, si)
}

pub fn compute_numerical(cfg: &RunConfig) -> Result<NumericalRun> {
    let grid = resolve_grid(cfg).stage("grid")?;
    let matrix = build_squeezing_matrix(&cfg.crystal, &cfg.pump, &grid).stage("squeezing matrix")?;
    numerical_from_matrix(cfg, matrix)
}

/// Spectrum, pairing and diagnostics of an already built Γ.
pub fn numerical_from_matrix(cfg: &RunConfig, matrix: SqueezingMatrixPhysical) -> Result<NumericalRun> {
    let gamma = &matrix.gamma;
    let imag = imaginary_fraction(gamma);
    let factors = takagi(gamma, DEFAULT_REAL_THRESHOLD).stage("takagi")?;
    let takagi_res = takagi_residual(gamma, &factors);
    let spectrum = SqueezingSpectrum::from_takagi(factors);
    let symplectic_residual = squeezer_from_spectrum(&spectrum).residual();

    let jsa = extract_jsa(&matrix);
    let schmidt = schmidt_from_jsa(&jsa.jsa).stage("schmidt")?;

    let values = &spectrum.values;
    let r1 = values.first().copied().unwrap_or(0.0);
    let pairing = pair_eigenvalues(values, cfg.pairing_tol);
    let (fit, k_s_raw) = if r1 > 0.0 {
        (fit_geometric(values, Some(FIT_PAIRS)).ok(), schmidt_number(values).ok())
    } else {
        (None, None)
    };
    let k = EXPORT_MODES.min(values.len());
    let weights = signal_weight(&spectrum);
    let summary = NumericalSummary {
        omega_s: find_central_detuning(&cfg.crystal, &cfg.pump).ok(),
        real_path: imag <= DEFAULT_REAL_THRESHOLD,
        imaginary_fraction: imag,
        r1,
        leading_values: values[..k].to_vec(),
        k_s_geometric: fit.map(|f| geometric_schmidt_number(f.q)),
        fit,
        k_s_raw,
        pairing,
        leakage: jsa.leakage,
        leakage_flagged: jsa.flagged,
        signal_weight_deviation: if r1 > 0.0 {
            weights[..k].iter().fold(0.0f64, |m, w| m.max((w - 0.5).abs()))
        } else {
            0.0
        },
        schmidt_values: schmidt.values[..(k / 2).min(schmidt.values.len())].to_vec(),
    };
    Ok(NumericalRun { matrix, spectrum, schmidt, takagi_residual: takagi_res, symplectic_residual, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSummary {
    pub times: CharacteristicTimes,
    pub params: GaussianModelParams,
    pub factors: MehlerFactors,
    pub k_s_geometric: f64,
    /// |Ω₊| bound of the linearized pump mismatch, in units of ω₀.
    pub group_velocity_bound_omega0: f64,
    pub omega_p_over_omega0: f64,
    /// Largest signal chirp phase |ζ₁τ₁²δΩ²| over ±3 mode widths (rad).
    pub max_chirp_phase: f64,
    /// Worst |kernel − truncated sum| on a 41×41 grid over ±4 widths,
    /// relative to the Hilbert-Schmidt norm.
    pub truncation_error: f64,
    pub truncation_bound: f64,
    pub terms: usize,
}

#[derive(Debug, Clone)]
pub struct AnalyticRun {
    pub summary: AnalyticSummary,
    pub grid: FrequencyGrid,
}

/// Worst relative deviation of the `terms`-term Mehler series from the
/// kernel on an `n×n` grid over `±extent` (rescaled coordinates).
pub fn mehler_truncation_error(g: &GaussianModelParams, f: &MehlerFactors, terms: usize, n: usize, extent: f64) -> (f64, f64) {
    let axis: Vec<f64> = (0..n).map(|i| -extent + 2.0 * extent * i as f64 / (n - 1).max(1) as f64).collect();
    let mut worst = 0.0f64;
    let mut bound = 0.0f64;
    for &x in &axis {
        for &y in &axis {
            let (s, b) = evaluate_kernel_sum(f, x, y, terms);
            worst = worst.max((s - evaluate_kernel_lhs(g, x, y)).norm());
            bound = bound.max(b);
        }
    }
    let hs = f.primed_norm();
    (worst / hs, bound / hs)
}

pub fn compute_analytic(cfg: &RunConfig) -> Result<AnalyticRun> {
    let times = characteristic_times(&cfg.crystal, &cfg.pump).stage("characteristic times")?;
    let params = gaussian_model_params(&times).stage("gaussian model")?;
    let factors = mehler_factors(&params).stage("mehler factors")?;
    let grid = resolve_grid(cfg).stage("grid")?;
    let (truncation_error, truncation_bound) = mehler_truncation_error(&params, &factors, cfg.mehler_terms, 41, 4.0);
    let w0 = cfg.pump.omega0();
    let summary = AnalyticSummary {
        times,
        params,
        factors,
        k_s_geometric: geometric_schmidt_number(factors.q),
        group_velocity_bound_omega0: group_velocity_bound(&cfg.crystal, &cfg.pump)? / w0,
        omega_p_over_omega0: times.omega_p / w0,
        max_chirp_phase: (factors.zeta1 * 9.0).abs(),
        truncation_error,
        truncation_bound,
        terms: cfg.mehler_terms,
    };
    Ok(AnalyticRun { summary, grid })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapRow {
    pub k: usize,
    pub signal: f64,
    pub idler: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub k: usize,
    /// r_{2k+1}/r_1 from the numerical spectrum.
    pub numerical: f64,
    /// q^k of the analytic model.
    pub analytic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub q_numerical: Option<f64>,
    pub q_analytic: f64,
    pub overlaps: Vec<OverlapRow>,
    pub ratios: Vec<RatioRow>,
}

/// Numerical Schmidt mode `k` of one band, rescaled to unit norm with the
/// grid-spacing weight.
pub fn numerical_schmidt_mode(run: &NumericalRun, k: usize, branch: ModeBranch) -> CVec {
    let h = run.grid().spacing;
    let col = match branch {
        ModeBranch::Signal => run.schmidt.c.column(k).into_owned(),
        ModeBranch::Idler => run.schmidt.d.column(k).into_owned(),
    };
    col / Complex64::new(h.sqrt(), 0.0)
}

/// Analytic mode `k` sampled on the numerical grid in the delay-free frame.
pub fn analytic_mode_on(run: &NumericalRun, a: &AnalyticSummary, k: usize, branch: ModeBranch) -> CVec {
    let g = run.grid();
    let band = match branch {
        ModeBranch::Signal => g.signal(),
        ModeBranch::Idler => g.idler(),
    };
    analytic_schmidt_mode(k, branch, &a.factors, &a.times, band, g.spacing, ModeFrame::DelayFree)
}

pub fn compare_runs(num: &NumericalRun, ana: &AnalyticSummary) -> Result<Comparison> {
    let h = num.grid().spacing;
    let orders = COMPARE_ORDERS.min(num.schmidt.values.len());
    let overlaps = (0..orders)
        .map(|k| {
            let o = |b| mode_overlap(&analytic_mode_on(num, ana, k, b), &numerical_schmidt_mode(num, k, b), h).map(|z| z.norm());
            Ok(OverlapRow { k, signal: o(ModeBranch::Signal)?, idler: o(ModeBranch::Idler)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let values = &num.spectrum.values;
    let r1 = values.first().copied().unwrap_or(0.0);
    let ratios = (0..10.min(values.len() / 2))
        .map(|k| RatioRow {
            k,
            numerical: if r1 > 0.0 { values[2 * k] / r1 } else { 0.0 },
            analytic: ana.factors.q.powi(k as i32),
        })
        .collect();
    Ok(Comparison { q_numerical: num.summary.fit.map(|f| f.q), q_analytic: ana.factors.q, overlaps, ratios })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub takagi: Option<f64>,
    pub symplectic: Option<f64>,
    pub leakage: Option<f64>,
    /// |p² + q² − 1| of the analytic factors.
    pub mehler_unitarity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Resolved config, Sellmeier constants included.
    pub config: RunConfig,
    pub grid: Option<GridSummary>,
    pub numerical: Option<NumericalSummary>,
    pub analytic: Option<AnalyticSummary>,
    pub comparison: Option<Comparison>,
    pub residuals: Residuals,
    pub notes: Vec<String>,
    /// Residual checks that failed; a nonempty list means a failed run.
    pub threshold_failures: Vec<String>,
    pub manifest: Vec<ManifestEntry>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.threshold_failures.is_empty()
    }
}

/// In-memory results of a run before anything is written.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: RunReport,
    pub numerical: Option<NumericalRun>,
    pub analytic: Option<AnalyticRun>,
}

pub fn evaluate(cfg: &RunConfig) -> Result<Evaluation> {
    cfg.validate()?;
    let kind = cfg.pipeline;
    let mut notes = Vec::new();
    let numerical = match kind {
        PipelineKind::Analytic => None,
        _ => Some(compute_numerical(cfg)?),
    };
    let analytic = match kind {
        PipelineKind::Numerical => None,
        PipelineKind::Analytic | PipelineKind::Compare => Some(compute_analytic(cfg)?),
        PipelineKind::NearDegenerate => match compute_analytic(cfg) {
            Ok(a) => Some(a),
            Err(e) => {
                notes.push(format!("analytic model unavailable: {e}"));
                None
            }
        },
    };
    let comparison = match (kind, &numerical, &analytic) {
        (PipelineKind::Compare | PipelineKind::NearDegenerate, Some(n), Some(a)) if n.summary.r1 > 0.0 => {
            Some(compare_runs(n, &a.summary).stage("compare")?)
        }
        _ => None,
    };

    let mut residuals = Residuals::default();
    let mut failures = Vec::new();
    if let Some(n) = &numerical {
        residuals.takagi = Some(n.takagi_residual);
        residuals.symplectic = Some(n.symplectic_residual);
        residuals.leakage = Some(n.summary.leakage);
        if n.takagi_residual > TAKAGI_TOL {
            failures.push(format!("takagi residual {:.3e} exceeds {TAKAGI_TOL:.0e}", n.takagi_residual));
        }
        if n.symplectic_residual > SYMPLECTIC_TOL {
            failures.push(format!("symplectic residual {:.3e} exceeds {SYMPLECTIC_TOL:.0e}", n.symplectic_residual));
        }
        if n.summary.r1 == 0.0 {
            notes.push("zero squeezing spectrum (gain = 0): degenerate case, no fit".into());
        } else if n.summary.fit.is_none() {
            notes.push("fewer than three usable pairs: geometric fit skipped".into());
        }
        if n.summary.leakage_flagged {
            notes.push(format!(
                "signal and idler bands overlap: leakage {:.3e} above {:.2}",
                n.summary.leakage,
                crate::pdc::LEAKAGE_FLAG
            ));
        }
        if let Some(ff) = n.summary.pairing.first_failure {
            notes.push(format!("pairing fails at index {ff} (tol {:.1e})", cfg.pairing_tol));
        }
    }
    if let Some(a) = &analytic {
        let f = &a.summary.factors;
        let dev = (f.p * f.p + f.q * f.q - 1.0).abs();
        residuals.mehler_unitarity = Some(dev);
        if dev > 1e-12 {
            failures.push(format!("p² + q² deviates from 1 by {dev:.3e}"));
        }
    }
    let grid = numerical.as_ref().map(|n| n.grid()).or(analytic.as_ref().map(|a| &a.grid)).map(GridSummary::from);
    let report = RunReport {
        config: cfg.clone(),
        grid,
        numerical: numerical.as_ref().map(|n| n.summary.clone()),
        analytic: analytic.as_ref().map(|a| a.summary.clone()),
        comparison,
        residuals,
        notes,
        threshold_failures: failures,
        manifest: Vec::new(),
    };
    Ok(Evaluation { report, numerical, analytic })
}

fn mode_rows(modes: &[(usize, ModeBranch, Vec<f64>, CVec)]) -> Vec<Vec<String>> {
    modes
        .iter()
        .flat_map(|(k, b, grid, v)| {
            let name = match b {
                ModeBranch::Signal => "signal",
                ModeBranch::Idler => "idler",
            };
            grid.iter()
                .zip(v.iter())
                .map(move |(w, z)| vec![k.to_string(), name.to_string(), fmt_f64(*w), fmt_f64(z.re), fmt_f64(z.im)])
        })
        .collect()
}

const MODE_HEADER: [&str; 5] = ["k", "branch", "omega", "re", "im"];

/// Write every artifact of an evaluation into `dir`.
pub fn write_artifacts(ev: &Evaluation, dir: &Path, format: OutputFormat) -> Result<Vec<ManifestEntry>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    if let Some(n) = &ev.numerical {
        let g = n.grid();
        if format.csv() {
            out.push(export_spectrum_csv(&n.spectrum, &dir.join("spectrum.csv"))?);
            let stride = g.n().div_ceil(HEATMAP_MAX);
            out.push(export_matrix_heatmap(&n.matrix.gamma, &g.detunings, &g.detunings, stride, &dir.join("gamma_heatmap.csv"))?);
            let modes: Vec<_> = (0..COMPARE_ORDERS.min(g.m))
                .flat_map(|k| {
                    [ModeBranch::Signal, ModeBranch::Idler].map(|b| {
                        let band = if b == ModeBranch::Signal { g.signal() } else { g.idler() };
                        (k, b, band.to_vec(), numerical_schmidt_mode(n, k, b))
                    })
                })
                .collect();
            out.push(write_csv(&dir.join("schmidt_modes.csv"), "modes_csv", &MODE_HEADER, mode_rows(&modes))?);
        }
        if format.json() {
            out.push(export_spectrum_json(&n.spectrum, &g.detunings, EXPORT_MODES, &dir.join("spectrum.json"))?);
        }
    }
    if let Some(a) = &ev.analytic {
        let g = ev.numerical.as_ref().map(|n| n.grid()).unwrap_or(&a.grid);
        let modes: Vec<_> = (0..COMPARE_ORDERS)
            .flat_map(|k| {
                [ModeBranch::Signal, ModeBranch::Idler].map(|b| {
                    let band = if b == ModeBranch::Signal { g.signal() } else { g.idler() };
                    let v = analytic_schmidt_mode(k, b, &a.summary.factors, &a.summary.times, band, g.spacing, ModeFrame::DelayFree);
                    (k, b, band.to_vec(), v)
                })
            })
            .collect();
        if format.csv() {
            out.push(write_csv(&dir.join("analytic_modes.csv"), "modes_csv", &MODE_HEADER, mode_rows(&modes))?);
        }
        if format.json() {
            out.push(write_json(&dir.join("analytic.json"), "analytic_json", &a.summary, 1)?);
        }
    }
    if let Some(c) = &ev.report.comparison {
        let rows = c.overlaps.iter().map(|o| vec![o.k.to_string(), fmt_f64(o.signal), fmt_f64(o.idler)]);
        out.push(write_csv(&dir.join("overlaps.csv"), "overlaps_csv", &["k", "signal", "idler"], rows)?);
        let rows = c.ratios.iter().map(|r| vec![r.k.to_string(), fmt_f64(r.numerical), fmt_f64(r.analytic)]);
        out.push(write_csv(&dir.join("ratios.csv"), "ratios_csv", &["k", "numerical", "analytic"], rows)?);
    }
    Ok(out)
}

/// Evaluate, write artifacts into `cfg.output.dir` and finish with
/// `report.json`, whose manifest lists every file of the run.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunReport> {
    let ev = evaluate(cfg)?;
    let dir = &cfg.output.dir;
    let mut report = ev.report.clone();
    report.manifest = write_artifacts(&ev, dir, cfg.output.format)?;
    let path = dir.join("report.json");
    report.manifest.push(ManifestEntry { path: path.clone(), kind: "report_json".into(), rows: 1 });
    write_json(&path, "report_json", &report, 1)?;
    Ok(report)
}

/// Replace the value at dotted `path` (e.g. `crystal.length_mm`) with the
/// TOML literal `value`; bare words are taken as strings.
pub fn apply_override(cfg: &RunConfig, path: &str, value: &str) -> Result<RunConfig> {
    let mut root = toml::Value::try_from(cfg).map_err(|e| Error::Parse(e.to_string()))?;
    let parsed: toml::Value = toml::from_str::<toml::Table>(&format!("v = {value}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    let mut node = &mut root;
    for (i, key) in keys.iter().enumerate() {
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::validation(path, format!("{} is not a table", keys[..i].join("."))))?;
        if i + 1 == keys.len() {
            if !table.contains_key(*key) && !matches!(*key, "half_width" | "window") {
                return Err(Error::validation(path, "no such parameter"));
            }
            table.insert(key.to_string(), parsed.clone());
            break;
        }
        node = table.get_mut(*key).ok_or_else(|| Error::validation(path, "no such parameter"))?;
    }
    let out: RunConfig = root.try_into().map_err(|e: toml::de::Error| Error::validation(path, e.to_string()))?;
    out.validate()?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: String,
    pub error: Option<String>,
    pub exit_code: i32,
    pub q_fit: Option<f64>,
    pub k_s_geometric: Option<f64>,
    pub q_analytic: Option<f64>,
    pub tau1: Option<f64>,
    pub tau2: Option<f64>,
    pub zeta1: Option<f64>,
    pub zeta2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub param: String,
    pub rows: Vec<SweepRow>,
    pub manifest: Vec<ManifestEntry>,
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect()
}

/// Run the config once per value of `param`, concurrently. Each run writes
/// into `<dir>/<param>=<value>/`; `sweep.csv` summarizes them.
pub fn run_sweep(cfg: &RunConfig, param: &str, values: &[String]) -> Result<SweepReport> {
    let base: PathBuf = cfg.output.dir.clone();
    let rows: Vec<SweepRow> = values
        .par_iter()
        .map(|v| {
            let run = apply_override(cfg, param, v).and_then(|mut c| {
                c.output.dir = base.join(sanitize(&format!("{param}={v}")));
                run_pipeline(&c)
            });
            match run {
                Ok(r) => SweepRow {
                    value: v.clone(),
                    error: (!r.passed()).then(|| r.threshold_failures.join("; ")),
                    exit_code: if r.passed() { 0 } else { 3 },
                    q_fit: r.numerical.as_ref().and_then(|n| n.fit.map(|f| f.q)),
                    k_s_geometric: r.numerical.as_ref().and_then(|n| n.k_s_geometric),
                    q_analytic: r.analytic.as_ref().map(|a| a.factors.q),
                    tau1: r.analytic.as_ref().map(|a| a.factors.tau1),
                    tau2: r.analytic.as_ref().map(|a| a.factors.tau2),
                    zeta1: r.analytic.as_ref().map(|a| a.factors.zeta1),
                    zeta2: r.analytic.as_ref().map(|a| a.factors.zeta2),
                },
                Err(e) => SweepRow {
                    value: v.clone(),
                    error: Some(e.to_string()),
                    exit_code: e.exit_code(),
                    q_fit: None,
                    k_s_geometric: None,
                    q_analytic: None,
                    tau1: None,
                    tau2: None,
                    zeta1: None,
                    zeta2: None,
                },
            }
        })
        .collect();
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    let table = rows.iter().map(|r| {
        vec![
            r.value.clone(),
            r.exit_code.to_string(),
            opt(r.q_fit),
            opt(r.k_s_geometric),
            opt(r.q_analytic),
            opt(r.tau1),
            opt(r.tau2),
            opt(r.zeta1),
            opt(r.zeta2),
        ]
    });
    let header = ["value", "exit_code", "q_fit", "k_s_geometric", "q_analytic", "tau1", "tau2", "zeta1", "zeta2"];
    let entry = write_csv(&base.join("sweep.csv"), "sweep_csv", &header, table)?;
    Ok(SweepReport { param: param.to_string(), rows, manifest: vec![entry] })
}
