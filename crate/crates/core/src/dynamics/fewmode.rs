use super::ode::dopri5;
use super::trajectory::{time_grid, AmplitudeTrajectory, EmitterSpec};
use crate::error::Result;
use crate::model::ModelParameters;
use crate::scalar::C64;
use crate::tolerances::Tolerances;
use crate::units::fs_to_internal;

pub fn solve_fewmode_single_excitation(
    params: &ModelParameters<f64>,
    emitter: &EmitterSpec,
    t_max_fs: f64,
    dt_fs: f64,
) -> Result<AmplitudeTrajectory> {
    solve_fewmode_single_excitation_with(params, emitter, t_max_fs, dt_fs, &Tolerances::default())
}

/// Amplitude equations of the few-mode model in the single-excitation sector
/// (rotating-wave coupling), frame rotating at ω_eg:
///
/// i ċ_e = Σ_i g_i c_i
/// i ċ_i = Σ_j (ω_ij − ω_eg δ_ij) c_j − (i/2) κ_i c_i + g_i c_e
pub fn solve_fewmode_single_excitation_with(
    params: &ModelParameters<f64>,
    emitter: &EmitterSpec,
    t_max_fs: f64,
    dt_fs: f64,
    tol: &Tolerances,
) -> Result<AmplitudeTrajectory> {
    emitter.validate()?;
    let times = time_grid(t_max_fs, dt_fs)?;
    let n = params.n_modes();
    let m = n + 1;

    // −i·M, row-major
    let mut a = vec![C64::new(0.0, 0.0); m * m];
    let mi = |z: C64| C64::new(z.im, -z.re);
    for i in 0..n {
        let g = params.g()[i];
        a[i + 1] = mi(C64::new(g, 0.0));
        a[(i + 1) * m] = mi(C64::new(g, 0.0));
        for j in 0..n {
            let mut h = C64::new(params.omega()[(i, j)], 0.0);
            if i == j {
                h -= C64::new(emitter.omega_eg, 0.5 * params.kappa()[i]);
            }
            a[(i + 1) * m + j + 1] = mi(h);
        }
    }
    let scale = (0..m).map(|i| a[i * m..(i + 1) * m].iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);

    let mut y0 = vec![C64::new(0.0, 0.0); m];
    y0[0] = C64::new(1.0, 0.0);
    let t_nat: Vec<f64> = times.iter().map(|&t| fs_to_internal(t)).collect();
    let rhs = |y: &[C64], dy: &mut [C64]| {
        for i in 0..m {
            let row = &a[i * m..(i + 1) * m];
            dy[i] = row.iter().zip(y).map(|(a, y)| a * y).sum();
        }
    };
    let (ys, stats) = dopri5(rhs, &y0, &t_nat, tol.ode_rtol, tol.ode_atol, scale)?;
    log::debug!("few-mode propagation: {} accepted, {} rejected steps", stats.accepted, stats.rejected);

    let c_e = ys.iter().map(|y| y[0]).collect();
    let c_modes = ys.into_iter().map(|y| y[1..].to_vec()).collect();
    Ok(AmplitudeTrajectory { times, c_e, c_modes: Some(c_modes), warnings: Vec::new() })
}
