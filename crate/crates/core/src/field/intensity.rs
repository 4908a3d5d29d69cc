use rayon::prelude::*;

use super::correlation::CorrelationTable;
use super::kernel::FieldKernelTable;
use crate::error::{Error, Result};
use crate::scalar::C64;
use crate::units::{EPSILON_0, SPEED_OF_LIGHT};

/// Upper bound on points × snapshot times in [`intensity_map`].
pub const MAX_MAP_VALUES: usize = 50_000_000;

/// Choice of evaluation path in [`field_intensity_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntensityPath {
    /// Single time integral when the correlation is rank 1, double sum otherwise.
    #[default]
    Auto,
    /// Always the double sum.
    Generic,
}

/// Intensity traces I(r, t) in W/m².
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityTraces {
    pub times: Vec<f64>,
    pub point_ids: Vec<String>,
    pub coords: Vec<[f64; 3]>,
    /// `[point][time]`
    pub intensity: Vec<Vec<f64>>,
}

impl IntensityTraces {
    /// Each point divided by its own maximum over time (points that stay dark
    /// are left at zero).
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        for row in &mut out.intensity {
            let m = row.iter().cloned().fold(0.0, f64::max);
            if m > 0.0 {
                row.iter_mut().for_each(|v| *v /= m);
            }
        }
        out
    }

    pub fn peak(&self, point: usize) -> f64 {
        self.intensity[point].iter().cloned().fold(0.0, f64::max)
    }
}

/// Spatial snapshots, `values[time][point]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityMap {
    pub times: Vec<f64>,
    pub point_ids: Vec<String>,
    pub coords: Vec<[f64; 3]>,
    pub values: Vec<Vec<f64>>,
    pub normalized: bool,
}

pub fn field_intensity(kernels: &FieldKernelTable, corr: &CorrelationTable) -> Result<IntensityTraces> {
    field_intensity_with(kernels, corr, IntensityPath::Auto)
}

/// I(r,t) = 2ε₀c ∫₀ᵗ∫₀ᵗ C(t′,t″) K(r,t−t′)·K*(r,t−t″) dt′dt″, trapezoid in
/// both time arguments.
pub fn field_intensity_with(
    kernels: &FieldKernelTable,
    corr: &CorrelationTable,
    path: IntensityPath,
) -> Result<IntensityTraces> {
    check_grids(kernels, corr)?;
    let intensity =
        (0..kernels.n_points()).into_par_iter().map(|p| point_trace(&kernels.kernel[p], corr, path)).collect();
    Ok(IntensityTraces {
        times: corr.times().to_vec(),
        point_ids: kernels.point_ids.clone(),
        coords: kernels.coords.clone(),
        intensity,
    })
}

/// Snapshots of the intensity at the given times, optionally normalized by
/// each point's maximum over the full correlation window.
pub fn intensity_map(
    kernels: &FieldKernelTable,
    corr: &CorrelationTable,
    times_fs: &[f64],
    normalize: bool,
) -> Result<IntensityMap> {
    check_grids(kernels, corr)?;
    let n_values = kernels.n_points().saturating_mul(times_fs.len());
    if n_values > MAX_MAP_VALUES {
        return Err(Error::Limit(format!(
            "{} points x {} times exceeds the map limit of {MAX_MAP_VALUES} values",
            kernels.n_points(),
            times_fs.len()
        )));
    }
    let grid = corr.times();
    let dt = if grid.len() > 1 { grid[1] - grid[0] } else { 1.0 };
    let mut idx = Vec::with_capacity(times_fs.len());
    for &t in times_fs {
        let k = (t / dt).round();
        if k < 0.0 || k as usize >= grid.len() || (k * dt - t).abs() > 1e-6 * dt {
            return Err(Error::Precondition(format!("snapshot time {t} fs is not on the correlation grid")));
        }
        idx.push(k as usize);
    }
    let last = idx.iter().copied().max().unwrap_or(0);
    let per_point: Vec<Vec<f64>> = (0..kernels.n_points())
        .into_par_iter()
        .map(|p| {
            let trace = point_trace(&kernels.kernel[p], corr, IntensityPath::Auto);
            let scale = if normalize { trace.iter().cloned().fold(0.0, f64::max) } else { 1.0 };
            let scale = if scale > 0.0 { scale } else { 1.0 };
            debug_assert!(trace.len() > last);
            idx.iter().map(|&k| trace[k] / scale).collect()
        })
        .collect();
    let values = (0..idx.len()).map(|t| per_point.iter().map(|row| row[t]).collect()).collect();
    Ok(IntensityMap {
        times: times_fs.to_vec(),
        point_ids: kernels.point_ids.clone(),
        coords: kernels.coords.clone(),
        values,
        normalized: normalize,
    })
}

fn check_grids(kernels: &FieldKernelTable, corr: &CorrelationTable) -> Result<()> {
    let times = corr.times();
    if times.len() > kernels.tau.len() {
        return Err(Error::Dimension(format!(
            "kernel covers {} fs but the correlation runs to {} fs",
            kernels.tau.last().copied().unwrap_or(0.0),
            times.last().copied().unwrap_or(0.0)
        )));
    }
    if times.len() > 1 {
        let dt = times[1] - times[0];
        if (kernels.dtau() - dt).abs() > 1e-9 * dt {
            return Err(Error::Dimension(format!(
                "kernel step {} fs differs from correlation step {dt} fs",
                kernels.dtau()
            )));
        }
    }
    Ok(())
}

fn point_trace(k: &[[C64; 3]], corr: &CorrelationTable, path: IntensityPath) -> Vec<f64> {
    let times = corr.times();
    let n = times.len();
    let dt = if n > 1 { times[1] - times[0] } else { 0.0 };
    let weight = |m: usize, last: usize| if m == 0 || m == last { 0.5 * dt } else { dt };
    let to_w_m2 = 2.0 * EPSILON_0 * SPEED_OF_LIGHT;
    let mut out = vec![0.0; n];
    match (corr, path) {
        (CorrelationTable::Rank1 { f, .. }, IntensityPath::Auto) => {
            for (t, o) in out.iter_mut().enumerate().skip(1) {
                let mut e = [C64::new(0.0, 0.0); 3];
                for m in 0..=t {
                    let a = f[m] * weight(m, t);
                    for c in 0..3 {
                        e[c] += a * k[t - m][c].conj();
                    }
                }
                *o = to_w_m2 * e.iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
        }
        _ => {
            let mut inner = vec![C64::new(0.0, 0.0); n];
            for (t, o) in out.iter_mut().enumerate().skip(1) {
                let mut total = 0.0;
                for c in 0..3 {
                    // inner_m = Σ_l C(m,l) w_l K*(t−l)
                    for (m, slot) in inner.iter_mut().enumerate().take(t + 1) {
                        let mut s = C64::new(0.0, 0.0);
                        for l in 0..=t {
                            s += corr.value(m, l) * (k[t - l][c].conj() * weight(l, t));
                        }
                        *slot = s;
                    }
                    let mut acc = C64::new(0.0, 0.0);
                    for m in 0..=t {
                        acc += k[t - m][c] * inner[m] * weight(m, t);
                    }
                    total += acc.re;
                }
                *o = to_w_m2 * total;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel(n: usize, dt: f64, f: impl Fn(f64) -> [C64; 3]) -> FieldKernelTable {
        let tau: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let kernel = vec![tau.iter().map(|&t| f(t)).collect()];
        FieldKernelTable { point_ids: vec!["p".into()], coords: vec![[0.0; 3]], tau, kernel, warnings: vec![] }
    }

    fn damped(t: f64) -> [C64; 3] {
        let z = C64::new(-0.05 * t, 1.7 * t).exp();
        [z, z * 0.3, C64::new(0.0, 0.0)]
    }

    fn rank1(n: usize, dt: f64) -> CorrelationTable {
        let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let f = times.iter().map(|&t| C64::new(-0.02 * t, -1.6 * t).exp() * 0.5).collect();
        CorrelationTable::rank1(times, f).unwrap()
    }

    #[test]
    fn fast_and_generic_paths_agree() {
        let k = kernel(120, 0.1, damped);
        let c = rank1(100, 0.1);
        let fast = field_intensity(&k, &c).unwrap();
        let slow = field_intensity_with(&k, &c, IntensityPath::Generic).unwrap();
        let dense = field_intensity(&k, &c.to_dense()).unwrap();
        let scale = fast.peak(0);
        assert!(scale > 0.0);
        for t in 0..100 {
            assert!((fast.intensity[0][t] - slow.intensity[0][t]).abs() <= 1e-10 * scale);
            assert_eq!(slow.intensity[0][t], dense.intensity[0][t]);
        }
    }

    #[test]
    fn generic_path_is_linear_in_correlation() {
        let k = kernel(60, 0.1, damped);
        let c = rank1(50, 0.1).to_dense();
        let a = field_intensity(&k, &c).unwrap();
        let b = field_intensity(&k, &c.scaled(2.0).unwrap()).unwrap();
        for (x, y) in a.intensity[0].iter().zip(&b.intensity[0]) {
            assert!((2.0 * x - y).abs() <= 1e-14 * y.abs().max(1e-300));
        }
    }

    #[test]
    fn zero_inputs_give_zero() {
        let c = rank1(30, 0.1);
        let z = field_intensity(&kernel(30, 0.1, |_| [C64::new(0.0, 0.0); 3]), &c).unwrap();
        assert!(z.intensity[0].iter().all(|&v| v == 0.0));
        let zc = CorrelationTable::rank1(c.times().to_vec(), vec![C64::new(0.0, 0.0); 30]).unwrap();
        let z = field_intensity(&kernel(30, 0.1, damped), &zc).unwrap();
        assert!(z.intensity[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn grid_mismatch_rejected() {
        let c = rank1(30, 0.1);
        assert!(matches!(field_intensity(&kernel(20, 0.1, damped), &c), Err(Error::Dimension(_))));
        assert!(matches!(field_intensity(&kernel(40, 0.2, damped), &c), Err(Error::Dimension(_))));
    }

    #[test]
    fn map_matches_traces_and_normalizes() {
        let mut k = kernel(50, 0.1, damped);
        k.point_ids.push("q".into());
        k.coords.push([1.0, 0.0, 0.0]);
        let second: Vec<_> = k
            .tau
            .iter()
            .map(|&t| {
                let d = damped(t);
                [d[1], d[0], d[2]]
            })
            .collect();
        k.kernel.push(second);
        let c = rank1(50, 0.1);
        let traces = field_intensity(&k, &c).unwrap();
        let map = intensity_map(&k, &c, &[1.0, 3.0], false).unwrap();
        assert_eq!(map.values[0][1], traces.intensity[1][10]);
        assert_eq!(map.values[1][0], traces.intensity[0][30]);
        let norm = intensity_map(&k, &c, &[1.0, 3.0], true).unwrap();
        assert!((norm.values[1][0] - traces.intensity[0][30] / traces.peak(0)).abs() < 1e-15);
        assert!(norm.values.iter().flatten().all(|&v| (0.0..=1.0).contains(&v)));
        let nt = traces.normalized();
        assert!((nt.peak(1) - 1.0).abs() < 1e-15);
        assert!(intensity_map(&k, &c, &[1.05], false).is_err());
        assert!(intensity_map(&k, &c, &[10.0], false).is_err());
    }
}
