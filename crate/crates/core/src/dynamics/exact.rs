use log::warn;

use super::trajectory::{time_grid, AmplitudeTrajectory, EmitterSpec};
use crate::error::{Error, Result};
use crate::model::SpectralDensityTable;
use crate::scalar::C64;
use crate::tolerances::Tolerances;
use crate::units::{fs_to_internal, internal_to_fs};

/// Memory kernel K(τ_n) = ∫ J(ω) e^{−i(ω−ω_eg)τ_n} dω at τ_n = n·dt (natural
/// units), by trapezoidal quadrature over the table.
pub fn memory_kernel(table: &SpectralDensityTable<f64>, omega_eg: f64, dt_nat: f64, n: usize) -> Vec<C64> {
    let w = table.trapezoid_weights();
    let wj: Vec<f64> = w.iter().zip(table.j()).map(|(w, j)| w * j).collect();
    let detuning: Vec<f64> = table.omega().iter().map(|o| o - omega_eg).collect();
    (0..n)
        .map(|k| {
            let tau = k as f64 * dt_nat;
            let (mut re, mut im) = (0.0, 0.0);
            for (&a, &d) in wj.iter().zip(&detuning) {
                if a != 0.0 {
                    let (s, c) = (d * tau).sin_cos();
                    re += a * c;
                    im -= a * s;
                }
            }
            C64::new(re, im)
        })
        .collect()
}

pub fn solve_ww_exact(
    table: &SpectralDensityTable<f64>,
    emitter: &EmitterSpec,
    t_max_fs: f64,
    dt_fs: f64,
) -> Result<AmplitudeTrajectory> {
    solve_ww_exact_with(table, emitter, t_max_fs, dt_fs, &Tolerances::default())
}

/// Continuum reference: ċ_e = −∫₀ᵗ K(t−t′) c_e(t′) dt′, implicit trapezoidal
/// product rule (second order), O(N_t²).
pub fn solve_ww_exact_with(
    table: &SpectralDensityTable<f64>,
    emitter: &EmitterSpec,
    t_max_fs: f64,
    dt_fs: f64,
    tol: &Tolerances,
) -> Result<AmplitudeTrajectory> {
    emitter.validate()?;
    let times = time_grid(t_max_fs, dt_fs)?;
    let h = fs_to_internal(dt_fs);

    let span = table
        .omega()
        .iter()
        .zip(table.j())
        .filter(|(_, &j)| j > 0.0)
        .map(|(o, _)| (o - emitter.omega_eg).abs())
        .fold(0.0, f64::max);
    let phase = span * h;
    if phase > tol.max_phase_per_step {
        return Err(Error::StepTooLarge {
            phase,
            suggested_dt_fs: internal_to_fs(0.9 * tol.max_phase_per_step / span),
        });
    }

    let mut warnings = Vec::new();
    let peak = table.max_j();
    if peak > 0.0 {
        let edge = table.j()[0].max(table.j()[table.len() - 1]);
        if edge > tol.coverage_edge_rel * peak {
            let msg = format!(
                "spectral density at the grid edge is {:.2e} of its peak; the table may not cover the support of J",
                edge / peak
            );
            warn!("{msg}");
            warnings.push(msg);
        }
    }

    // the sampled kernel revives after 2π/Δω
    let om = table.omega();
    let widest = om.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let t_end = fs_to_internal(*times.last().unwrap_or(&0.0));
    if widest > 0.0 && t_end * widest > 2.0 * std::f64::consts::PI {
        let msg = format!(
            "t_max exceeds the recurrence time {:.4e} fs of the frequency grid; refine the grid",
            internal_to_fs(2.0 * std::f64::consts::PI / widest)
        );
        warn!("{msg}");
        warnings.push(msg);
    }

    let nt = times.len();
    let kernel = memory_kernel(table, emitter.omega_eg, h, nt);
    let mut c = Vec::with_capacity(nt);
    c.push(C64::new(1.0, 0.0));
    let denom = C64::new(1.0, 0.0) + kernel[0] * (h * h / 4.0);
    let mut integral = C64::new(0.0, 0.0);
    for n in 0..nt - 1 {
        // history part of ∫₀^{t_{n+1}} K(t_{n+1}−t′)c(t′)dt′, i.e. all but the endpoint term
        let mut hist = kernel[n + 1] * c[0] * 0.5;
        for j in 1..=n {
            hist += kernel[n + 1 - j] * c[j];
        }
        hist *= h;
        let next = (c[n] - (integral + hist) * (h / 2.0)) / denom;
        integral = hist + kernel[0] * next * (h / 2.0);
        c.push(next);
    }

    Ok(AmplitudeTrajectory { times, c_e: c, c_modes: None, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::linspace;

    #[test]
    fn zero_density_keeps_emitter_excited() {
        let om = linspace(0.5, 1.5, 101);
        let table = SpectralDensityTable::new(om, vec![0.0; 101]).unwrap();
        let traj = solve_ww_exact(&table, &EmitterSpec::excited(1.0), 50.0, 0.1).unwrap();
        assert!(traj.c_e.iter().all(|&c| c == C64::new(1.0, 0.0)));
        assert!(traj.warnings.is_empty());
    }

    #[test]
    fn warns_past_the_recurrence_time() {
        let om: Vec<f64> = linspace(0.9, 1.1, 21);
        let j = om.iter().map(|w| 1e-3 * (-(w - 1.0) * (w - 1.0) / 1e-3).exp()).collect();
        let table = SpectralDensityTable::new(om, j).unwrap();
        let short = solve_ww_exact(&table, &EmitterSpec::excited(1.0), 200.0, 1.0).unwrap();
        assert!(short.warnings.is_empty());
        let long = solve_ww_exact(&table, &EmitterSpec::excited(1.0), 500.0, 1.0).unwrap();
        assert!(long.warnings.iter().any(|w| w.contains("recurrence")));
    }

    #[test]
    fn refuses_coarse_step() {
        let om = linspace(0.5, 1.5, 101);
        let table = SpectralDensityTable::new(om, vec![1e-3; 101]).unwrap();
        match solve_ww_exact(&table, &EmitterSpec::excited(1.0), 50.0, 1.0) {
            Err(Error::StepTooLarge { suggested_dt_fs, .. }) => {
                assert!(suggested_dt_fs > 0.0 && suggested_dt_fs < 1.0);
                solve_ww_exact(&table, &EmitterSpec::excited(1.0), 10.0, suggested_dt_fs).unwrap();
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn kernel_at_zero_is_area() {
        let om: Vec<f64> = linspace(0.5, 1.5, 201);
        let j: Vec<f64> = om.iter().map(|o| (-(o - 1.0) * (o - 1.0) * 200.0).exp()).collect();
        let table = SpectralDensityTable::new(om, j).unwrap();
        let k = memory_kernel(&table, 1.0, 0.1, 3);
        assert!((k[0].re - table.integral()).abs() < 1e-15);
        assert_eq!(k[0].im, 0.0);
        // symmetric J about ω_eg → real kernel
        assert!(k[2].im.abs() < 1e-14);
    }

    #[test]
    fn edge_coverage_warns() {
        let om = linspace(0.9, 1.1, 101);
        let table = SpectralDensityTable::new(om, vec![1e-3; 101]).unwrap();
        let traj = solve_ww_exact(&table, &EmitterSpec::excited(1.0), 5.0, 0.1).unwrap();
        assert_eq!(traj.warnings.len(), 1);
    }

    #[test]
    fn ground_state_rejected() {
        let table = SpectralDensityTable::new(vec![0.5, 1.0, 1.5], vec![0.0; 3]).unwrap();
        let e = EmitterSpec { omega_eg: 1.0, initial_excited: false };
        assert!(matches!(solve_ww_exact(&table, &e, 1.0, 0.1), Err(Error::Unsupported(_))));
    }
}
