use rayon::prelude::*;

use super::greens::GreensFunctionTable;
use crate::dynamics::time_grid;
use crate::error::{Error, Result};
use crate::model::trapezoid_weights;
use crate::scalar::C64;
use crate::tolerances::Tolerances;
use crate::units::{fs_to_internal, internal_to_fs, ELEMENTARY_CHARGE, EPSILON_0, HBAR_SI, SPEED_OF_LIGHT};

/// Temporal field kernel K(r, τ) per observation point on a uniform τ grid.
/// Values in V/m per (e·nm) per fs.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldKernelTable {
    pub point_ids: Vec<String>,
    pub coords: Vec<[f64; 3]>,
    /// τ grid in fs, starting at 0.
    pub tau: Vec<f64>,
    /// `[point][tau]`, Cartesian components.
    pub kernel: Vec<Vec<[C64; 3]>>,
    pub warnings: Vec<String>,
}

impl FieldKernelTable {
    pub fn n_points(&self) -> usize {
        self.point_ids.len()
    }

    pub fn dtau(&self) -> f64 {
        if self.tau.len() > 1 {
            self.tau[1] - self.tau[0]
        } else {
            0.0
        }
    }
}

pub fn compute_kernel(gtable: &GreensFunctionTable, tau_max_fs: f64, dtau_fs: f64) -> Result<FieldKernelTable> {
    compute_kernel_with(gtable, tau_max_fs, dtau_fs, &Tolerances::default())
}

/// K(r,τ) = (1/πε₀c²) ∫ ω² Im{G(r,r_e,ω)}·n e^{iωτ} dω over the tabulated
/// frequencies (trapezoid), scaled to a dipole of 1 e·nm and a time element
/// of 1 fs.
pub fn compute_kernel_with(
    gtable: &GreensFunctionTable,
    tau_max_fs: f64,
    dtau_fs: f64,
    tol: &Tolerances,
) -> Result<FieldKernelTable> {
    let tau = time_grid(tau_max_fs, dtau_fs)?;
    let omega = gtable.omega();
    let w_max = *omega.last().unwrap();
    let dtau_nat = fs_to_internal(dtau_fs);
    let phase = w_max * dtau_nat;
    if phase > tol.max_phase_per_step {
        return Err(Error::StepTooLarge {
            phase,
            suggested_dt_fs: internal_to_fs(0.9 * tol.max_phase_per_step / w_max),
        });
    }
    let work = tau.len() as f64 * omega.len() as f64 * gtable.n_points() as f64;
    if work > 5e11 {
        return Err(Error::Limit(format!("kernel evaluation would need ~{work:.1e} operations")));
    }

    // ω in rad/s is s·ω[eV]; the integral scales as s³
    let s = ELEMENTARY_CHARGE / HBAR_SI;
    let pref = s.powi(3) / (std::f64::consts::PI * EPSILON_0 * SPEED_OF_LIGHT * SPEED_OF_LIGHT)
        * ELEMENTARY_CHARGE
        * 1e-9
        * 1e-15;
    let w = trapezoid_weights(omega);

    let mut warnings = Vec::new();
    // integrand weights per point: pref·w_k·ω_k²·ImG_c
    let weights: Vec<Vec<[f64; 3]>> = (0..gtable.n_points())
        .map(|p| {
            gtable
                .im_g(p)
                .iter()
                .zip(omega.iter().zip(&w))
                .map(|(g, (&om, &wk))| {
                    let a = pref * wk * om * om;
                    [a * g[0], a * g[1], a * g[2]]
                })
                .collect()
        })
        .collect();
    for p in 0..gtable.n_points() {
        let mag = |k: usize| {
            let g = gtable.im_g(p)[k];
            omega[k] * omega[k] * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt()
        };
        let peak = (0..omega.len()).map(mag).fold(0.0, f64::max);
        let edge = mag(0).max(mag(omega.len() - 1));
        if peak > 0.0 && edge > tol.kernel_edge_rel * peak {
            warnings.push(format!(
                "point '{}': kernel integrand at the frequency-grid edge is {:.2e} of its maximum",
                gtable.point_ids()[p],
                edge / peak
            ));
        }
    }

    let by_tau: Vec<Vec<[C64; 3]>> = tau
        .par_iter()
        .map(|&t| {
            let t_nat = fs_to_internal(t);
            let phasors: Vec<(f64, f64)> = omega.iter().map(|&om| (om * t_nat).sin_cos()).collect();
            weights
                .iter()
                .map(|wp| {
                    let mut acc = [C64::new(0.0, 0.0); 3];
                    for (a, &(sn, cs)) in wp.iter().zip(&phasors) {
                        for c in 0..3 {
                            acc[c].re += a[c] * cs;
                            acc[c].im += a[c] * sn;
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let mut kernel = vec![Vec::with_capacity(tau.len()); gtable.n_points()];
    for row in by_tau {
        for (p, v) in row.into_iter().enumerate() {
            kernel[p].push(v);
        }
    }

    for (p, k) in kernel.iter().enumerate() {
        let norm = |v: &[C64; 3]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let peak = k.iter().map(norm).fold(0.0, f64::max);
        let tail = k.last().map(norm).unwrap_or(0.0);
        if peak > 0.0 && tail > tol.kernel_tail_rel * peak {
            warnings.push(format!(
                "point '{}': |K(tau_max)| is {:.2e} of its maximum; tau_max may truncate the kernel",
                gtable.point_ids()[p],
                tail / peak
            ));
        }
    }
    for msg in &warnings {
        log::warn!("{msg}");
    }

    Ok(FieldKernelTable {
        point_ids: gtable.point_ids().to_vec(),
        coords: gtable.coords().to_vec(),
        tau,
        kernel,
        warnings,
    })
}
