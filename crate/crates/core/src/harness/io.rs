//! CSV input and output: experiment reports, statistic histograms and complex matrices.

use std::path::Path;

use nalgebra::DMatrix;

use super::{HistogramReport, MonteCarloReport, ReportRow};
use crate::cca::{CMatrix, Complex64};
use crate::error::{Error, Result};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        kind => Error::Parse {
            path: path.to_path_buf(),
            message: format!("{kind:?}"),
        },
    }
}

const REPORT_HEADER: [&str; 8] = [
    "sweep_value",
    "detector",
    "p_d",
    "trials",
    "err_trials",
    "d_hat_mode",
    "rx_mode",
    "ry_mode",
];

/// Report CSV as a string; the header is always present.
pub fn report_csv_string(report: &MonteCarloReport) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(REPORT_HEADER).expect("in-memory write");
    for row in report.rows() {
        w.serialize(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is UTF-8")
}

/// Writes one row per (sweep value, detector).
pub fn emit_csv(report: &MonteCarloReport, path: &Path) -> Result<()> {
    std::fs::write(path, report_csv_string(report)).map_err(io_err(path))
}

pub fn read_report_csv(path: &Path) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(REPORT_HEADER) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!("unexpected header {header:?}"),
        });
    }
    r.deserialize()
        .map(|row| row.map_err(|e| csv_err(path, e)))
        .collect()
}

/// Writes `trial,statistic` rows for the evaluated trials.
pub fn emit_histogram_csv(report: &HistogramReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["trial", "statistic"]).map_err(|e| csv_err(path, e))?;
    for &(trial, c) in &report.samples {
        w.serialize((trial, c)).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_histogram_csv(path: &Path) -> Result<Vec<(usize, f64)>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| csv_err(path, e)))
        .collect()
}

/// Parses `a+bi`, `a-bi`, `a`, `bi` (also with `j`, spaces or parentheses).
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let s: String = text
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '(' && *c != ')')
        .collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return s.parse().ok().map(|re| Complex64::new(re, 0.0));
    };
    let unit = |t: &str| -> Option<f64> {
        match t {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => t.parse().ok(),
        }
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    match split {
        Some(i) => Some(Complex64::new(body[..i].parse().ok()?, unit(&body[i..])?)),
        None => Some(Complex64::new(0.0, unit(body)?)),
    }
}

pub fn format_complex(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Reads a headerless CSV matrix: rows are channel components, columns are samples.
pub fn read_complex_matrix(path: &Path) -> Result<CMatrix> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, field)| {
                parse_complex(field).ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    message: format!("row {}, column {}: cannot parse {field:?}", i + 1, j + 1),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: "empty matrix".into(),
        });
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

pub fn write_complex_matrix(path: &Path, z: &CMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for row in z.row_iter() {
        w.write_record(row.iter().map(|&v| format_complex(v)))
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_complex_forms() {
        let c = |re, im| Some(Complex64::new(re, im));
        assert_eq!(parse_complex("1.5+2i"), c(1.5, 2.0));
        assert_eq!(parse_complex("1.5-2i"), c(1.5, -2.0));
        assert_eq!(parse_complex("-1e-3-2.5E+2j"), c(-1e-3, -250.0));
        assert_eq!(parse_complex(" 3 "), c(3.0, 0.0));
        assert_eq!(parse_complex("-i"), c(0.0, -1.0));
        assert_eq!(parse_complex("4.25i"), c(0.0, 4.25));
        assert_eq!(parse_complex("(1 + 1i)"), c(1.0, 1.0));
        assert_eq!(parse_complex("2e5"), c(2e5, 0.0));
        assert_eq!(parse_complex("abc"), None);
        assert_eq!(parse_complex(""), None);
        assert_eq!(parse_complex("1+2"), None);
    }

    #[test]
    fn format_round_trips() {
        for z in [
            Complex64::new(0.1, -0.2),
            Complex64::new(-3.0, 0.0),
            Complex64::new(1e-300, 7.5e10),
            Complex64::new(0.0, -0.0),
        ] {
            assert_eq!(parse_complex(&format_complex(z)), Some(z));
        }
    }

    #[test]
    fn matrix_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let z = DMatrix::from_fn(3, 4, |i, j| Complex64::new(i as f64 - 0.5, j as f64 / 3.0));
        write_complex_matrix(&path, &z).unwrap();
        assert_eq!(read_complex_matrix(&path).unwrap(), z);
    }

    #[test]
    fn bad_matrix_reports_location() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        std::fs::write(&path, "1+1i,2\n3,oops\n").unwrap();
        let err = read_complex_matrix(&path).unwrap_err().to_string();
        assert!(err.contains("row 2, column 2"), "{err}");
        std::fs::write(&path, "1,2\n3\n").unwrap();
        assert!(matches!(read_complex_matrix(&path), Err(Error::Parse { .. })));
    }

    #[test]
    fn missing_file_names_path() {
        let err = read_report_csv(Path::new("/nonexistent/report.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/report.csv"));
        assert_eq!(err.exit_code(), 2);
    }
}
