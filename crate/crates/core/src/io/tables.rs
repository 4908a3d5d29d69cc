use std::path::Path;

use super::{csv_reader, parse_err, parse_f64, write_atomic};
use crate::dynamics::{tilde_populations, AmplitudeTrajectory, LindbladTraces, TildeBasis};
use crate::error::{Error, Result};
use crate::field::{IntensityMap, IntensityTraces};

/// A numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DataTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn write_table(path: &Path, table: &DataTable) -> Result<()> {
    let mut out = table.columns.join(",");
    out.push('\n');
    for row in &table.rows {
        if row.len() != table.columns.len() {
            return Err(Error::Dimension(format!("row has {} values for {} columns", row.len(), table.columns.len())));
        }
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

pub fn read_table(path: &Path) -> Result<DataTable> {
    let mut rdr = csv_reader(path)?;
    let mut records = rdr.records();
    let header = records.next().ok_or_else(|| parse_err(path, 1, "empty file"))??;
    let columns: Vec<String> = header.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != columns.len() {
            return Err(parse_err(path, line, format!("expected {} columns, found {}", columns.len(), rec.len())));
        }
        rows.push(
            rec.iter().zip(&columns).map(|(cell, col)| parse_f64(path, line, col, cell)).collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(DataTable { columns, rows })
}

/// `t_fs,pop_e,pop_mode_1..N` and, with a basis, `pop_tilde_1..N`.
pub fn trajectory_table(traj: &AmplitudeTrajectory, tilde: Option<&TildeBasis>) -> Result<DataTable> {
    let n = traj.n_modes();
    let mut columns = vec!["t_fs".to_string(), "pop_e".to_string()];
    columns.extend((1..=n).map(|i| format!("pop_mode_{i}")));
    let tilde_pops = match tilde {
        Some(b) => {
            columns.extend((1..=b.n_modes()).map(|i| format!("pop_tilde_{i}")));
            Some(tilde_populations(traj, b)?)
        }
        None => None,
    };
    let pe = traj.emitter_population();
    let pm = traj.mode_populations();
    let rows = (0..traj.times.len())
        .map(|k| {
            let mut row = vec![traj.times[k], pe[k]];
            if let Some(pm) = &pm {
                row.extend_from_slice(&pm[k]);
            }
            if let Some(tp) = &tilde_pops {
                row.extend_from_slice(&tp[k]);
            }
            row
        })
        .collect();
    Ok(DataTable { columns, rows })
}

/// Same column layout as [`trajectory_table`], from the dense solver.
pub fn lindblad_table(traces: &LindbladTraces) -> DataTable {
    let n = traces.mode_populations.first().map_or(0, Vec::len);
    let mut columns = vec!["t_fs".to_string(), "pop_e".to_string()];
    columns.extend((1..=n).map(|i| format!("pop_mode_{i}")));
    let rows = (0..traces.times.len())
        .map(|k| {
            let mut row = vec![traces.times[k], traces.emitter_population[k]];
            row.extend_from_slice(&traces.mode_populations[k]);
            row
        })
        .collect();
    DataTable { columns, rows }
}

/// `t_fs` followed by one `I_<point>_W_per_m2` column per point.
pub fn intensity_table(traces: &IntensityTraces) -> DataTable {
    let mut columns = vec!["t_fs".to_string()];
    columns.extend(traces.point_ids.iter().map(|id| format!("I_{id}_W_per_m2")));
    let rows = (0..traces.times.len())
        .map(|k| {
            let mut row = vec![traces.times[k]];
            row.extend(traces.intensity.iter().map(|p| p[k]));
            row
        })
        .collect();
    DataTable { columns, rows }
}

/// Raster for snapshot `index`: `x_nm,y_nm,z_nm,I` per point.
pub fn map_table(map: &IntensityMap, index: usize) -> DataTable {
    let label = if map.normalized { "I_normalized" } else { "I_W_per_m2" };
    let columns = ["x_nm", "y_nm", "z_nm", label].iter().map(|s| s.to_string()).collect();
    let rows = map.coords.iter().zip(&map.values[index]).map(|(c, &v)| vec![c[0], c[1], c[2], v]).collect();
    DataTable { columns, rows }
}
