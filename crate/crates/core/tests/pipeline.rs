use std::path::{Path, PathBuf};

use twinsqueeze::config::{parse_config, parse_config_str, PipelineKind, RunConfig};
use twinsqueeze::export::read_spectrum_json;
use twinsqueeze::pipeline::{apply_override, evaluate, run_pipeline, run_sweep};
use twinsqueeze::Error;

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn small(dir: &Path, kind: PipelineKind) -> RunConfig {
    let mut cfg = parse_config(&config_path("bbo_nondegenerate.toml")).unwrap();
    cfg.grid.m = 64;
    cfg.pipeline = kind;
    cfg.output.dir = dir.to_path_buf();
    cfg
}

#[test]
fn shipped_configs_parse_and_round_trip() {
    for name in ["bbo_nondegenerate.toml", "bbo_near_degenerate.toml"] {
        let cfg = parse_config(&config_path(name)).unwrap();
        let back = parse_config_str(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }
}

#[test]
fn missing_file_is_io_error() {
    let e = parse_config(Path::new("/nonexistent/run.toml")).unwrap_err();
    assert!(matches!(e, Error::Io { .. }));
    assert_eq!(e.exit_code(), 4);
}

#[test]
fn compare_run_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_pipeline(&small(dir.path(), PipelineKind::Compare)).unwrap();
    assert!(report.passed(), "{:?}", report.threshold_failures);
    for entry in &report.manifest {
        assert!(entry.path.exists(), "{}", entry.path.display());
    }
    let kinds: Vec<&str> = report.manifest.iter().map(|e| e.kind.as_str()).collect();
    for k in ["spectrum_csv", "spectrum_json", "heatmap_csv", "overlaps_csv", "ratios_csv", "report_json"] {
        assert!(kinds.contains(&k), "{k} missing from {kinds:?}");
    }
    // the config echo carries the Sellmeier constants
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(text.contains("\"sellmeier_o\"") && text.contains("2.7405"));
    assert!(report.comparison.unwrap().q_analytic > 0.8);
}

#[test]
fn spectrum_json_matches_csv_and_memory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path(), PipelineKind::Numerical);
    let ev = evaluate(&cfg).unwrap();
    run_pipeline(&cfg).unwrap();
    let values = &ev.numerical.as_ref().unwrap().spectrum.values;
    let rec = read_spectrum_json(&dir.path().join("spectrum.json")).unwrap();
    assert_eq!(&rec.values, values);
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let parsed: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(&parsed, values);
}

#[test]
fn identical_runs_give_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_pipeline(&small(a.path(), PipelineKind::Numerical)).unwrap();
    run_pipeline(&small(b.path(), PipelineKind::Numerical)).unwrap();
    for f in ["spectrum.csv", "gamma_heatmap.csv", "schmidt_modes.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn heatmap_shows_two_lobes() {
    let dir = tempfile::tempdir().unwrap();
    run_pipeline(&small(dir.path(), PipelineKind::Numerical)).unwrap();
    let text = std::fs::read_to_string(dir.path().join("gamma_heatmap.csv")).unwrap();
    let (mut anti, mut same) = (0.0, 0.0);
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        if v[0] * v[1] < 0.0 {
            anti += v[4] * v[4];
        } else {
            same += v[4] * v[4];
        }
    }
    assert!(same < 1e-2 * anti, "same-sign weight {same} vs anti {anti}");
}

#[test]
fn zero_gain_succeeds_with_note() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path(), PipelineKind::Numerical);
    cfg.pump.gain = 0.0;
    let r = run_pipeline(&cfg).unwrap();
    assert!(r.passed());
    assert_eq!(r.numerical.unwrap().r1, 0.0);
    assert!(r.notes.iter().any(|n| n.contains("gain = 0")));
}

#[test]
fn near_degenerate_flags_leakage() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config(&config_path("bbo_near_degenerate.toml")).unwrap();
    cfg.grid.m = 96;
    cfg.output.dir = dir.path().to_path_buf();
    let r = run_pipeline(&cfg).unwrap();
    let n = r.numerical.unwrap();
    assert!(n.leakage_flagged);
    assert!(n.pairing.first_failure.is_some());
    assert!(r.notes.iter().any(|s| s.contains("pairing fails")));
}

#[test]
fn analytic_only_run() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_pipeline(&small(dir.path(), PipelineKind::Analytic)).unwrap();
    assert!(r.numerical.is_none());
    let a = r.analytic.unwrap();
    assert!((a.omega_p_over_omega0 - 0.00545).abs() < 1e-4);
    // FWHM of the intensity spectrum, the quoted 0.0091·ω₀
    assert!((2.0 * 2f64.ln().sqrt() * a.omega_p_over_omega0 - 0.0091).abs() < 2e-4);
    assert!((a.group_velocity_bound_omega0 - 1.04).abs() < 0.01);
    assert!(a.max_chirp_phase < 0.1 * std::f64::consts::PI);
}

#[test]
fn stage_label_on_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path(), PipelineKind::Compare);
    cfg.crystal.theta0_deg = 35.0;
    let e = evaluate(&cfg).unwrap_err();
    assert!(matches!(e, Error::Stage { .. }), "{e}");
    assert_eq!(e.exit_code(), 3);
}

#[test]
fn sweep_over_length() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path(), PipelineKind::Analytic);
    cfg.grid.half_width = None;
    let values: Vec<String> = ["0.5", "1.0", "2.0"].iter().map(|s| s.to_string()).collect();
    let rep = run_sweep(&cfg, "crystal.length_mm", &values).unwrap();
    assert_eq!(rep.rows.len(), 3);
    assert!(rep.rows.iter().all(|r| r.exit_code == 0));
    let tau: Vec<f64> = rep.rows.iter().map(|r| r.tau1.unwrap()).collect();
    assert!(tau[0] < tau[1] && tau[1] < tau[2]);
    assert!(dir.path().join("sweep.csv").exists());
    assert!(apply_override(&cfg, "pump.nope", "1").is_err());
}
