//! CSV/JSON emitters and the per-directory run manifest.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Failure writing or reading an output, with the offending path.
#[derive(Debug)]
pub struct IoError {
    pub path: PathBuf,
    pub message: String,
}

impl fmt::Display for IoError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path.display(), self.message)
    }
}

impl std::error::Error for IoError {}

fn at(path: &Path) -> impl Fn(String) -> IoError + '_ {
    move |message| IoError { path: path.to_path_buf(), message }
}

/// 17 significant digits: enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// A CSV cell.
#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::S(x.to_string())
    }
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::I(x) => x.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

/// Writes a header and rows. Every row must have as many cells as the header.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<Cell>]) -> Result<(), String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
    w.write_record(header).map_err(|e| e.to_string())?;
    for (i, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(format!("row {i} has {} cells, header has {}", row.len(), header.len()));
        }
        w.write_record(row.iter().map(Cell::text)).map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}

pub fn emit_csv(path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> Result<(), IoError> {
    let f = fs::File::create(path).map_err(|e| at(path)(e.to_string()))?;
    write_csv(io::BufWriter::new(f), header, rows).map_err(at(path))
}

/// Formatter printing every float with 17 significant digits.
struct Digits17;

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }
}

/// JSON in struct field order (stable), floats at 17 significant digits, non-finite floats as null.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    value.serialize(&mut ser).map_err(|e| e.to_string())?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| e.to_string())
}

pub fn emit_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let s = to_json(value).map_err(at(path))?;
    fs::write(path, s).map_err(|e| at(path)(e.to_string()))
}

pub fn sha256_file(path: &Path) -> Result<String, IoError> {
    let bytes = fs::read(path).map_err(|e| at(path)(e.to_string()))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Debug, Clone, Serialize, serde::Deserialize, PartialEq)]
pub struct OutputDigest {
    /// File name relative to the manifest's directory.
    pub file: String,
    pub sha256: String,
}

/// Record of one command run, written as `manifest.json` next to its outputs.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config: serde_json::Value,
    pub version: String,
    pub wall_time_s: f64,
    pub outputs: Vec<OutputDigest>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl RunManifest {
    /// Digests `files` (all inside `dir`) and writes the manifest into `dir`.
    pub fn write(
        dir: &Path,
        command_line: Vec<String>,
        config: serde_json::Value,
        wall_time_s: f64,
        files: &[PathBuf],
    ) -> Result<RunManifest, IoError> {
        let mut outputs = Vec::with_capacity(files.len());
        for f in files {
            let name = f.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            outputs.push(OutputDigest { file: name, sha256: sha256_file(f)? });
        }
        outputs.sort_by(|a, b| a.file.cmp(&b.file));
        let m = RunManifest { command_line, config, version: env!("CARGO_PKG_VERSION").to_string(), wall_time_s, outputs };
        let path = dir.join(MANIFEST_NAME);
        let s = serde_json::to_string_pretty(&m).map_err(|e| at(&path)(e.to_string()))?;
        fs::write(&path, s + "\n").map_err(|e| at(&path)(e.to_string()))?;
        Ok(m)
    }

    pub fn read(dir: &Path) -> Result<RunManifest, IoError> {
        let path = dir.join(MANIFEST_NAME);
        let s = fs::read_to_string(&path).map_err(|e| at(&path)(e.to_string()))?;
        serde_json::from_str(&s).map_err(|e| at(&path)(e.to_string()))
    }

    /// Files whose current digest differs from the recorded one.
    pub fn verify(&self, dir: &Path) -> Result<Vec<String>, IoError> {
        let mut bad = Vec::new();
        for o in &self.outputs {
            if sha256_file(&dir.join(&o.file))? != o.sha256 {
                bad.push(o.file.clone());
            }
        }
        Ok(bad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_rows_give_header_only() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &["a", "b"], &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\r\n");
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let xs = [std::f64::consts::PI, 1e-300, -2.5e17, 0.1 + 0.2, f64::MIN_POSITIVE, 5e-324];
        let rows: Vec<Vec<Cell>> = xs.iter().map(|&x| vec![Cell::F(x), Cell::S("a,b".into())]).collect();
        let mut buf = Vec::new();
        write_csv(&mut buf, &["x", "label"], &rows).unwrap();
        let mut r = csv::Reader::from_reader(buf.as_slice());
        for (rec, x) in r.records().zip(xs) {
            let rec = rec.unwrap();
            assert_eq!(rec[0].parse::<f64>().unwrap().to_bits(), x.to_bits());
            assert_eq!(&rec[1], "a,b");
        }
    }

    #[test]
    fn row_length_mismatch() {
        assert!(write_csv(Vec::new(), &["a"], &[vec![Cell::F(1.0), Cell::F(2.0)]]).is_err());
    }

    #[test]
    fn json_floats_and_order() {
        #[derive(Serialize)]
        struct S {
            z: f64,
            a: f64,
            n: f64,
        }
        let s = to_json(&S { z: 0.1, a: 2.0, n: f64::NAN }).unwrap();
        assert_eq!(s, "{\"z\":1.0000000000000001e-1,\"a\":2.0000000000000000e0,\"n\":null}\n");
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["z"].as_f64().unwrap(), 0.1);
    }

    #[test]
    fn manifest_digests_match() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("out.csv");
        emit_csv(&f, &["x"], &[vec![Cell::F(1.0)]]).unwrap();
        let m = RunManifest::write(dir.path(), vec!["peakon".into()], serde_json::json!({}), 0.0, &[f.clone()]).unwrap();
        let again = RunManifest::read(dir.path()).unwrap();
        assert_eq!(again.outputs, m.outputs);
        assert!(again.verify(dir.path()).unwrap().is_empty());
        fs::write(&f, "tampered").unwrap();
        assert_eq!(again.verify(dir.path()).unwrap(), vec!["out.csv".to_string()]);
    }
}
