//! File formats: plain CSV and JSON text, written so that every artifact
//! reads back bit-identically.

mod greens;
mod spectrum;
mod tables;

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub use greens::{read_greens, write_greens, GREENS_HEADER};
pub use spectrum::{ingest_spectrum, ingest_spectrum_with, write_spectrum, Ingested, SPECTRUM_HEADER};
pub use tables::{intensity_table, lindblad_table, map_table, read_table, trajectory_table, write_table, DataTable};

pub(crate) fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

/// Writes through a temporary sibling file so readers never see partial output.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = Path::new(&tmp);
    fs::write(tmp, contents).map_err(|e| io_err(tmp, e))?;
    fs::rename(tmp, path).map_err(|e| io_err(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line() as u64,
        msg: e.to_string(),
    })
}

pub(crate) fn parse_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.display().to_string(), line, msg: msg.into() }
}

pub(crate) fn parse_f64(path: &Path, line: u64, column: &str, cell: &str) -> Result<f64> {
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| parse_err(path, line, format!("column '{column}': '{cell}' is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("column '{column}': non-finite value '{cell}'")));
    }
    Ok(v)
}

pub(crate) fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ModelParams;

    #[test]
    fn params_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/params.json");
        let p = crate::synthetic::RandomModel::default().sample_seeded(4, 3);
        write_json(&path, &p).unwrap();
        let back: ModelParams = read_json(&path).unwrap();
        assert_eq!(p, back);
        assert!(!dir.path().join("nested/params.json.partial").exists());
    }

    #[test]
    fn bad_json_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        fs::write(&path, "{\n \"n_modes\": 1,\n \"omega\": [[1.0]],\n \"kappa\": [-0.1],\n \"g\": [0.1]\n}").unwrap();
        match read_json::<ModelParams>(&path) {
            Err(e @ Error::Parse { .. }) => {
                let text = e.to_string();
                assert!(text.contains("kappa") && !text.contains(":0:"), "{text}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_json::<ModelParams>(&dir.path().join("missing.json")), Err(Error::Io { .. })));
    }
}
