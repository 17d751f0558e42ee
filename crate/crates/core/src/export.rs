//! Flat-file artifacts: spectra, modes and matrix heatmaps.

use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::twinbeam::{SpectrumSource, SqueezingSpectrum};

/// One file written by a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub kind: String,
    /// Data rows (CSV) or records (JSON).
    pub rows: usize,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Write a CSV with a fixed header. Rows are preformatted cells.
pub fn write_csv(path: &Path, kind: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<ManifestEntry> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    let mut count = 0;
    for row in rows {
        writeln!(w, "{}", row.join(",")).map_err(io)?;
        count += 1;
    }
    w.flush().map_err(io)?;
    Ok(ManifestEntry { path: path.to_path_buf(), kind: kind.into(), rows: count })
}

pub fn write_json<T: Serialize>(path: &Path, kind: &str, value: &T, rows: usize) -> Result<ManifestEntry> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::io(path, e.into()))?;
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(ManifestEntry { path: path.to_path_buf(), kind: kind.into(), rows })
}

/// Seventeen significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// 1-based pair id and gap for every value; `None` for an unpaired tail.
fn pair_columns(s: &SqueezingSpectrum) -> Vec<(Option<usize>, Option<f64>)> {
    (0..s.values.len())
        .map(|k| s.pairs.get(k / 2).map_or((None, None), |p| (Some(k / 2 + 1), Some(p.gap))))
        .collect()
}

/// CSV `index,r,pair_id,pair_gap` with 1-based indices.
pub fn export_spectrum_csv(s: &SqueezingSpectrum, path: &Path) -> Result<ManifestEntry> {
    let cols = pair_columns(s);
    let rows = s.values.iter().zip(cols).enumerate().map(|(k, (&r, (id, gap)))| {
        vec![
            (k + 1).to_string(),
            fmt_f64(r),
            id.map(|i| i.to_string()).unwrap_or_default(),
            gap.map(fmt_f64).unwrap_or_default(),
        ]
    });
    write_csv(path, "spectrum_csv", &["index", "r", "pair_id", "pair_gap"], rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub source: SpectrumSource,
    pub values: Vec<f64>,
    pub pair_id: Vec<Option<usize>>,
    pub pair_gap: Vec<Option<f64>>,
    pub detunings: Vec<f64>,
    /// Leading mode vectors in grid order.
    pub modes: Vec<ModeRecord>,
}

impl SpectrumRecord {
    pub fn new(s: &SqueezingSpectrum, detunings: &[f64], max_modes: usize) -> Self {
        let (pair_id, pair_gap) = pair_columns(s).into_iter().unzip();
        let modes = (0..max_modes.min(s.modes.ncols()))
            .map(|k| {
                let col = s.modes.column(k);
                ModeRecord { re: col.iter().map(|z| z.re).collect(), im: col.iter().map(|z| z.im).collect() }
            })
            .collect();
        SpectrumRecord { source: s.source, values: s.values.clone(), pair_id, pair_gap, detunings: detunings.to_vec(), modes }
    }
}

/// JSON mirror of the spectrum with the first `max_modes` mode vectors.
pub fn export_spectrum_json(s: &SqueezingSpectrum, detunings: &[f64], max_modes: usize, path: &Path) -> Result<ManifestEntry> {
    let rec = SpectrumRecord::new(s, detunings, max_modes);
    write_json(path, "spectrum_json", &rec, rec.values.len())
}

pub fn read_spectrum_json(path: &Path) -> Result<SpectrumRecord> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Long-format heatmap `omega,omega_prime,re,im,abs`, row-major, keeping
/// every `stride`-th row and column.
pub fn export_matrix_heatmap(
    a: &CMat,
    rows: &[f64],
    cols: &[f64],
    stride: usize,
    path: &Path,
) -> Result<ManifestEntry> {
    if rows.len() != a.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: rows.len() });
    }
    if cols.len() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.ncols(), found: cols.len() });
    }
    let stride = stride.max(1);
    let cells = (0..a.nrows()).step_by(stride).flat_map(|i| {
        (0..a.ncols()).step_by(stride).map(move |j| {
            let z = a[(i, j)];
            vec![fmt_f64(rows[i]), fmt_f64(cols[j]), fmt_f64(z.re), fmt_f64(z.im), fmt_f64(z.norm())]
        })
    });
    write_csv(path, "heatmap_csv", &["omega", "omega_prime", "re", "im", "abs"], cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn spec4() -> SqueezingSpectrum {
        SqueezingSpectrum::new(vec![1.0, 0.999, 0.5, 0.1], CMat::identity(4, 4), SpectrumSource::DirectTakagi)
    }

    #[test]
    fn spectrum_csv_shape() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let e = export_spectrum_csv(&spec4(), &p).unwrap();
        assert_eq!(e.rows, 4);
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,r,pair_id,pair_gap");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("1,1.0000000000000000e0,1,"));
    }

    #[test]
    fn odd_tail_has_no_pair() {
        let dir = tempfile::tempdir().unwrap();
        let s = SqueezingSpectrum::new(vec![1.0, 1.0, 0.3], CMat::identity(3, 3), SpectrumSource::DirectTakagi);
        let p = dir.path().join("s.csv");
        export_spectrum_csv(&s, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.lines().last().unwrap().ends_with("0.3000000000000000e0,,") || text.lines().last().unwrap().ends_with(",,"));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = spec4();
        s.values = vec![std::f64::consts::PI, 1.0 / 3.0, 1e-300, 0.0];
        s.modes[(1, 2)] = c(0.1 + 0.2, -1.0 / 7.0);
        let p = dir.path().join("s.json");
        export_spectrum_json(&s, &[-1.5, -0.5, 0.5, 1.5], 4, &p).unwrap();
        let back = read_spectrum_json(&p).unwrap();
        assert_eq!(back.values, s.values);
        assert_eq!(back.modes[2].re[1], 0.1 + 0.2);
        assert_eq!(back.modes[2].im[1], -1.0 / 7.0);
    }

    #[test]
    fn heatmap_rows_and_digits() {
        let dir = tempfile::tempdir().unwrap();
        let a = CMat::from_row_slice(2, 2, &[c(1.0 / 3.0, 0.0), c(0.0, 2.0), c(0.0, 2.0), c(-1.0, 1.0)]);
        let p = dir.path().join("h.csv");
        let e = export_matrix_heatmap(&a, &[-0.5, 0.5], &[-0.5, 0.5], 1, &p).unwrap();
        assert_eq!(e.rows, 4);
        let text = std::fs::read_to_string(&p).unwrap();
        let first: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(first[2], 1.0 / 3.0);
        assert!(export_matrix_heatmap(&a, &[0.0], &[0.0, 1.0], 1, &p).is_err());
    }
}
