use std::path::Path;

use super::{csv_reader, parse_err, parse_f64, write_atomic};
use crate::error::Result;
use crate::field::GreensFunctionTable;

pub const GREENS_HEADER: [&str; 8] =
    ["point_id", "x_nm", "y_nm", "z_nm", "omega_eV", "ImGx_per_m", "ImGy_per_m", "ImGz_per_m"];

struct PointRows {
    id: String,
    coords: [f64; 3],
    first_line: u64,
    rows: Vec<(f64, [f64; 3], u64)>,
}

/// Long-format Green's function CSV: one row per (point, frequency). Points
/// keep their order of first appearance; every point must share one
/// frequency grid.
pub fn read_greens(path: &Path) -> Result<GreensFunctionTable> {
    let mut rdr = csv_reader(path)?;
    let mut points: Vec<PointRows> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(k as u64 + 1, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if k == 0 && rec.get(1).is_some_and(|c| c.parse::<f64>().is_err()) {
            let header: Vec<&str> = rec.iter().collect();
            if header != GREENS_HEADER {
                return Err(parse_err(path, line, format!("expected header {}", GREENS_HEADER.join(","))));
            }
            continue;
        }
        if rec.len() != GREENS_HEADER.len() {
            return Err(parse_err(
                path,
                line,
                format!("expected {} columns, found {}", GREENS_HEADER.len(), rec.len()),
            ));
        }
        let mut v = [0.0; 7];
        for c in 0..7 {
            v[c] = parse_f64(path, line, GREENS_HEADER[c + 1], &rec[c + 1])?;
        }
        let id = rec[0].to_string();
        if id.is_empty() {
            return Err(parse_err(path, line, "empty point_id"));
        }
        let coords = [v[0], v[1], v[2]];
        let entry = match points.iter_mut().position(|p| p.id == id) {
            Some(i) => &mut points[i],
            None => {
                points.push(PointRows { id: id.clone(), coords, first_line: line, rows: Vec::new() });
                points.last_mut().unwrap()
            }
        };
        if entry.coords != coords {
            return Err(parse_err(
                path,
                line,
                format!("point '{id}' changes coordinates (first given on line {})", entry.first_line),
            ));
        }
        entry.rows.push((v[3], [v[4], v[5], v[6]], line));
    }
    if points.is_empty() {
        return Err(parse_err(path, 1, "no data rows"));
    }
    for p in &mut points {
        p.rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = p.rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(parse_err(path, w[1].2, format!("duplicate frequency {} for point '{}'", w[1].0, p.id)));
        }
    }
    let grid: Vec<f64> = points[0].rows.iter().map(|r| r.0).collect();
    for p in &points[1..] {
        if p.rows.len() != grid.len() || p.rows.iter().zip(&grid).any(|(r, w)| r.0 != *w) {
            return Err(parse_err(
                path,
                p.first_line,
                format!("point '{}' does not share the frequency grid of point '{}'", p.id, points[0].id),
            ));
        }
    }
    GreensFunctionTable::new(
        points.iter().map(|p| p.id.clone()).collect(),
        points.iter().map(|p| p.coords).collect(),
        grid,
        points.iter().map(|p| p.rows.iter().map(|r| r.1).collect()).collect(),
    )
}

pub fn write_greens(path: &Path, table: &GreensFunctionTable) -> Result<()> {
    let mut out = GREENS_HEADER.join(",");
    out.push('\n');
    for p in 0..table.n_points() {
        let id = &table.point_ids()[p];
        let [x, y, z] = table.coords()[p];
        for (w, g) in table.omega().iter().zip(table.im_g(p)) {
            out.push_str(&format!("{id},{x:?},{y:?},{z:?},{w:?},{:?},{:?},{:?}\n", g[0], g[1], g[2]));
        }
    }
    write_atomic(path, out.as_bytes())
}
