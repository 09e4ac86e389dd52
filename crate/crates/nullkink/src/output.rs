//! CSV and JSON writers.
//!
//! CSV files start with a `# config_sha256: <hex>` comment line followed by the
//! header. Numbers are written with 17 significant digits, so re-running a
//! configuration reproduces every file byte for byte.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Round-trip formatting used in every CSV file.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[derive(Debug, thiserror::Error)]
#[error("cannot write {path}: {source}")]
pub struct WriteError {
    pub path: PathBuf,
    pub source: io::Error,
}

/// Creates `dir` if needed and checks that files can be created in it.
pub fn prepare_dir(dir: &Path) -> Result<(), WriteError> {
    let err = |source| WriteError { path: dir.into(), source };
    std::fs::create_dir_all(dir).map_err(err)?;
    let probe = dir.join(".nullkink-write-test");
    File::create(&probe).map_err(err)?;
    std::fs::remove_file(&probe).map_err(err)
}

pub struct CsvWriter {
    out: BufWriter<File>,
    path: PathBuf,
    columns: usize,
}

impl CsvWriter {
    pub fn create(path: &Path, config_hash: &str, header: &[String]) -> Result<Self, WriteError> {
        let file = File::create(path).map_err(|source| WriteError { path: path.into(), source })?;
        let mut w = Self { out: BufWriter::new(file), path: path.into(), columns: header.len() };
        w.raw(&format!("# config_sha256: {config_hash}\n{}\n", header.join(",")))?;
        Ok(w)
    }

    fn raw(&mut self, s: &str) -> Result<(), WriteError> {
        self.out.write_all(s.as_bytes()).map_err(|source| WriteError { path: self.path.clone(), source })
    }

    /// Writes one row of already formatted fields.
    pub fn row(&mut self, fields: &[String]) -> Result<(), WriteError> {
        debug_assert_eq!(fields.len(), self.columns);
        let mut line = fields.join(",");
        line.push('\n');
        self.raw(&line)
    }

    pub fn numbers(&mut self, values: &[f64]) -> Result<(), WriteError> {
        let fields: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
        self.row(&fields)
    }

    pub fn finish(mut self) -> Result<(), WriteError> {
        self.out.flush().map_err(|source| WriteError { path: self.path.clone(), source })
    }
}

/// Writes `value` as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), WriteError> {
    let err = |source| WriteError { path: path.into(), source };
    let mut text = serde_json::to_string_pretty(value).map_err(|e| err(io::Error::other(e)))?;
    text.push('\n');
    std::fs::write(path, text).map_err(err)
}

/// Column name for the probe at `x`, e.g. `f_at_0.5`.
pub fn probe_column(x: f64) -> String {
    format!("f_at_{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 2.0 / 3.0, -1e-300, 12.458288341217909, 6.02214076e23] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.len(), 18, "{s}");
        }
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        let mut w = CsvWriter::create(&p, "abc", &["u".into(), "v".into()]).unwrap();
        w.numbers(&[1.0, -0.5]).unwrap();
        w.finish().unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text, "# config_sha256: abc\nu,v\n1.0000000000000000e0,-5.0000000000000000e-1\n");
    }

    #[test]
    fn probe_names() {
        assert_eq!(probe_column(0.5), "f_at_0.5");
        assert_eq!(probe_column(0.0), "f_at_0");
    }
}
