use std::path::Path;

use super::{csv_reader, parse_err, parse_f64, write_atomic};
use crate::error::Result;
use crate::model::SpectralDensityTable;
use crate::tolerances::Tolerances;

pub const SPECTRUM_HEADER: [&str; 2] = ["omega_eV", "J_eV"];

/// A parsed input together with the non-fatal issues found while reading it.
#[derive(Debug, Clone)]
pub struct Ingested<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

pub fn ingest_spectrum(path: &Path) -> Result<Ingested<SpectralDensityTable<f64>>> {
    ingest_spectrum_with(path, &Tolerances::default())
}

/// Reads a two-column `omega_eV,J_eV` CSV (header optional, `#` comments).
/// Unsorted rows are sorted, duplicate frequencies rejected, small negative J
/// clamped to zero.
pub fn ingest_spectrum_with(path: &Path, tol: &Tolerances) -> Result<Ingested<SpectralDensityTable<f64>>> {
    let mut rdr = csv_reader(path)?;
    let mut rows: Vec<(f64, f64, u64)> = Vec::new();
    let mut warnings = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(k as u64 + 1, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rows.is_empty() && k == 0 && rec.get(0).is_some_and(|c| c.parse::<f64>().is_err()) {
            let header: Vec<&str> = rec.iter().collect();
            if header != SPECTRUM_HEADER {
                warnings.push(format!("unexpected header {header:?}, expected {SPECTRUM_HEADER:?}"));
            }
            continue;
        }
        if rec.len() != 2 {
            return Err(parse_err(path, line, format!("expected 2 columns, found {}", rec.len())));
        }
        let w = parse_f64(path, line, SPECTRUM_HEADER[0], &rec[0])?;
        let j = parse_f64(path, line, SPECTRUM_HEADER[1], &rec[1])?;
        if w <= 0.0 {
            return Err(parse_err(path, line, format!("frequency {w} must be > 0")));
        }
        rows.push((w, j, line));
    }
    if rows.is_empty() {
        return Err(parse_err(path, 1, "no data rows"));
    }
    if rows.windows(2).any(|p| p[1].0 < p[0].0) {
        warnings.push("frequency grid was not increasing; rows sorted".into());
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    if let Some(p) = rows.windows(2).find(|p| p[1].0 == p[0].0) {
        return Err(parse_err(path, p[1].2, format!("duplicate frequency {} (also on line {})", p[1].0, p[0].2)));
    }
    let max = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    if let Some(r) = rows.iter().find(|r| r.1 < -tol.neg_j_rel * max) {
        return Err(parse_err(
            path,
            r.2,
            format!("J = {} is negative beyond tolerance ({:e} of max)", r.1, tol.neg_j_rel),
        ));
    }
    let (omega, j): (Vec<f64>, Vec<f64>) = rows.iter().map(|r| (r.0, r.1)).unzip();
    let (table, clamped) = SpectralDensityTable::with_tolerance(omega, j, tol.neg_j_rel)?;
    if clamped > 0 {
        warnings.push(format!("{clamped} slightly negative J value(s) clamped to zero"));
    }
    for w in &warnings {
        log::warn!("{}: {w}", path.display());
    }
    Ok(Ingested { value: table, warnings })
}

pub fn write_spectrum(path: &Path, table: &SpectralDensityTable<f64>) -> Result<()> {
    let mut out = format!("{},{}\n", SPECTRUM_HEADER[0], SPECTRUM_HEADER[1]);
    for (w, j) in table.omega().iter().zip(table.j()) {
        out.push_str(&format!("{w:?},{j:?}\n"));
    }
    write_atomic(path, out.as_bytes())
}
