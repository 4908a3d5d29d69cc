//! Weighted residuals of J_mod against tabulated data and their analytic
//! Jacobian.
//!
//! With x = (H̃ − ω)⁻¹g and F = gᵀx (so J_mod = Im F / π):
//! ∂F/∂ω_ii = −x_i², ∂F/∂ω_ij = −2x_ix_j (i < j, symmetric pair),
//! ∂F/∂κ_i = (i/2)x_i², ∂F/∂g_i = 2x_i.
//!
//! J_mod is unchanged when g_i and row/column i of ω flip sign together, so
//! the interacting layout fits a signed g and folds it back to g ≥ 0.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::Mat;
use crate::model::EffectiveHamiltonian;
use crate::spectral::resolvent_vector;
use crate::{ModelParams, Spectrum};

/// Residual weighting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// (J_fit − J_data) / max J
    Uniform,
    /// (J_fit − J_data) / (J_data + 0.01·max J)
    #[default]
    Relative,
    /// ln(J_fit + ε) − ln(J_data + ε), ε = 10⁻³·max J
    Log,
}

const RELATIVE_FLOOR: f64 = 0.01;
const LOG_FLOOR: f64 = 1e-3;

/// Which parameters are free, and how they map to the optimizer vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// [ω_ii…, ln κ_i…, ln g_i…]; off-diagonal ω frozen at zero.
    NonInteracting(usize),
    /// [ω_ij (i ≤ j, row-major upper triangle)…, ln κ_i…, g_i…] with g signed.
    Interacting(usize),
}

impl Layout {
    pub fn n_modes(&self) -> usize {
        match *self {
            Layout::NonInteracting(n) | Layout::Interacting(n) => n,
        }
    }

    fn n_omega(&self) -> usize {
        match *self {
            Layout::NonInteracting(n) => n,
            Layout::Interacting(n) => n * (n + 1) / 2,
        }
    }

    pub fn n_params(&self) -> usize {
        self.n_omega() + 2 * self.n_modes()
    }

    /// Optimizer vector for `params`. Zero couplings are lifted to a tiny
    /// positive value so the log parametrization stays finite.
    pub fn pack(&self, params: &ModelParams) -> Vec<f64> {
        let n = self.n_modes();
        assert_eq!(params.n_modes(), n);
        let mut v = Vec::with_capacity(self.n_params());
        match *self {
            Layout::NonInteracting(_) => v.extend((0..n).map(|i| params.omega()[(i, i)])),
            Layout::Interacting(_) => {
                for i in 0..n {
                    for j in i..n {
                        v.push(params.omega()[(i, j)]);
                    }
                }
            }
        }
        v.extend(params.kappa().iter().map(|k| k.ln()));
        match *self {
            Layout::NonInteracting(_) => {
                let gmax = params.g().iter().cloned().fold(0.0, f64::max).max(1e-300);
                v.extend(params.g().iter().map(|&g| g.max(1e-8 * gmax).ln()));
            }
            Layout::Interacting(_) => v.extend_from_slice(params.g()),
        }
        v
    }

    /// Sign of each coupling in an optimizer vector (all +1 for log couplings).
    fn g_signs(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n_modes();
        let off = self.n_omega() + n;
        match *self {
            Layout::NonInteracting(_) => vec![1.0; n],
            Layout::Interacting(_) => v[off..off + n].iter().map(|&g| if g < 0.0 { -1.0 } else { 1.0 }).collect(),
        }
    }

    pub fn unpack(&self, v: &[f64]) -> Result<ModelParams> {
        let n = self.n_modes();
        let mut omega = Mat::zeros(n, n);
        let off = self.n_omega();
        match *self {
            Layout::NonInteracting(_) => {
                for i in 0..n {
                    omega[(i, i)] = v[i];
                }
            }
            Layout::Interacting(_) => {
                let mut k = 0;
                for i in 0..n {
                    for j in i..n {
                        omega[(i, j)] = v[k];
                        omega[(j, i)] = v[k];
                        k += 1;
                    }
                }
            }
        }
        let kappa = v[off..off + n].iter().map(|x| x.exp()).collect();
        let g = match *self {
            Layout::NonInteracting(_) => v[off + n..off + 2 * n].iter().map(|x| x.exp()).collect(),
            Layout::Interacting(_) => {
                let s = self.g_signs(v);
                for i in 0..n {
                    for j in 0..n {
                        omega[(i, j)] *= s[i] * s[j];
                    }
                }
                v[off + n..off + 2 * n].iter().map(|x| x.abs()).collect()
            }
        };
        ModelParams::new(omega, kappa, g)
    }
}

/// Residual vector r and Jacobian stored column-major (`jac[a * m + k]` = ∂r_k/∂p_a).
pub struct Linearization {
    pub residuals: Vec<f64>,
    pub jacobian: Vec<f64>,
}

/// Least-squares problem: weighted residuals of J_mod against a table.
pub struct SpectrumResidual<'a> {
    table: &'a Spectrum,
    layout: Layout,
    weight: WeightMode,
    scale: f64,
}

impl<'a> SpectrumResidual<'a> {
    pub fn new(table: &'a Spectrum, layout: Layout, weight: WeightMode) -> Self {
        Self { table, layout, weight, scale: table.max_j() }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn n_residuals(&self) -> usize {
        self.table.len()
    }

    /// Residual and ∂r/∂J_fit for one sample.
    #[inline]
    fn weigh(&self, fit: f64, data: f64) -> (f64, f64) {
        match self.weight {
            WeightMode::Uniform => ((fit - data) / self.scale, 1.0 / self.scale),
            WeightMode::Relative => {
                let w = 1.0 / (data + RELATIVE_FLOOR * self.scale);
                ((fit - data) * w, w)
            }
            WeightMode::Log => {
                let eps = LOG_FLOOR * self.scale;
                let f = (fit + eps).max(1e-300);
                (f.ln() - (data + eps).ln(), 1.0 / f)
            }
        }
    }

    fn point(&self, h: &EffectiveHamiltonian<f64>, params: &ModelParams, w: f64) -> Result<(f64, Vec<Complex<f64>>)> {
        let x = resolvent_vector(h, params.g(), w)?;
        let f: f64 = params.g().iter().zip(&x).map(|(g, xi)| g * xi.im).sum();
        Ok((f / std::f64::consts::PI, x))
    }

    pub fn residuals(&self, p: &[f64]) -> Result<Vec<f64>> {
        let params = self.layout.unpack(p)?;
        let h = EffectiveHamiltonian::from_params(&params);
        let omega = self.table.omega();
        let data = self.table.j();
        (0..omega.len())
            .into_par_iter()
            .map(|k| {
                let (f, _) = self.point(&h, &params, omega[k])?;
                Ok(self.weigh(f, data[k]).0)
            })
            .collect()
    }

    /// Residuals plus the analytic Jacobian.
    pub fn linearize(&self, p: &[f64]) -> Result<Linearization> {
        let params = self.layout.unpack(p)?;
        let sign = self.layout.g_signs(p);
        let h = EffectiveHamiltonian::from_params(&params);
        let n = params.n_modes();
        let np = self.layout.n_params();
        let n_om = self.layout.n_omega();
        let omega = self.table.omega();
        let data = self.table.j();
        let m = omega.len();
        let inv_pi = 1.0 / std::f64::consts::PI;
        let rows: Vec<(f64, Vec<f64>)> = (0..m)
            .into_par_iter()
            .map(|k| {
                let (f, x) = self.point(&h, &params, omega[k])?;
                let (r, dr) = self.weigh(f, data[k]);
                let s = dr * inv_pi;
                let mut row = vec![0.0; np];
                match self.layout {
                    Layout::NonInteracting(_) => {
                        for i in 0..n {
                            row[i] = -(x[i] * x[i]).im * s;
                        }
                    }
                    Layout::Interacting(_) => {
                        let mut a = 0;
                        for i in 0..n {
                            for j in i..n {
                                let d = if i == j { -(x[i] * x[i]) } else { -2.0 * x[i] * x[j] };
                                row[a] = d.im * s * sign[i] * sign[j];
                                a += 1;
                            }
                        }
                    }
                }
                for i in 0..n {
                    let x2 = x[i] * x[i];
                    // ∂F/∂ln κ = κ·(i/2)x², Im = κ/2·Re(x²)
                    row[n_om + i] = 0.5 * params.kappa()[i] * x2.re * s;
                    row[n_om + n + i] = match self.layout {
                        // ∂F/∂ln g = g·2x, Im = 2g·Im(x)
                        Layout::NonInteracting(_) => 2.0 * params.g()[i] * x[i].im * s,
                        Layout::Interacting(_) => 2.0 * sign[i] * x[i].im * s,
                    };
                }
                Ok((r, row))
            })
            .collect::<Result<_>>()?;
        let mut residuals = Vec::with_capacity(m);
        let mut jacobian = vec![0.0; np * m];
        for (k, (r, row)) in rows.into_iter().enumerate() {
            residuals.push(r);
            for (a, v) in row.into_iter().enumerate() {
                jacobian[a * m + k] = v;
            }
        }
        Ok(Linearization { residuals, jacobian })
    }

    /// Central finite-difference Jacobian, for cross-checking the analytic one.
    pub fn linearize_fd(&self, p: &[f64]) -> Result<Linearization> {
        let residuals = self.residuals(p)?;
        let m = residuals.len();
        let np = p.len();
        let mut jacobian = vec![0.0; np * m];
        let mut q = p.to_vec();
        for a in 0..np {
            let h = 1e-6 * p[a].abs().max(1e-3);
            q[a] = p[a] + h;
            let rp = self.residuals(&q)?;
            q[a] = p[a] - h;
            let rm = self.residuals(&q)?;
            q[a] = p[a];
            for k in 0..m {
                jacobian[a * m + k] = (rp[k] - rm[k]) / (2.0 * h);
            }
        }
        Ok(Linearization { residuals, jacobian })
    }

    /// Unweighted fit quality: (relative L2 error, max |ΔJ| / max J_data).
    pub fn quality(table: &Spectrum, fit: &[f64]) -> (f64, f64) {
        let data = table.j();
        let diff2: f64 = fit.iter().zip(data).map(|(f, d)| (f - d) * (f - d)).sum();
        let norm2: f64 = data.iter().map(|d| d * d).sum();
        let max_diff = fit.iter().zip(data).map(|(f, d)| (f - d).abs()).fold(0.0, f64::max);
        let peak = table.max_j();
        let rel = if norm2 > 0.0 { (diff2 / norm2).sqrt() } else { diff2.sqrt() };
        let pw = if peak > 0.0 { max_diff / peak } else { max_diff };
        (rel, pw)
    }
}
