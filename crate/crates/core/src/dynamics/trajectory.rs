use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{abs2, C64};

/// Two-level emitter: transition energy (eV) and initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterSpec {
    pub omega_eg: f64,
    pub initial_excited: bool,
}

impl EmitterSpec {
    pub fn excited(omega_eg: f64) -> Self {
        Self { omega_eg, initial_excited: true }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.omega_eg > 0.0 && self.omega_eg.is_finite()) {
            return Err(Error::Precondition(format!("omega_eg must be > 0, got {}", self.omega_eg)));
        }
        if !self.initial_excited {
            return Err(Error::Unsupported("spontaneous emission needs an initially excited emitter".into()));
        }
        Ok(())
    }
}

/// Uniform output grid 0, dt, …, t_max (fs). `t_max` is rounded down to a
/// whole number of steps.
pub fn time_grid(t_max_fs: f64, dt_fs: f64) -> Result<Vec<f64>> {
    if !(dt_fs > 0.0 && dt_fs.is_finite()) || !(t_max_fs >= 0.0 && t_max_fs.is_finite()) {
        return Err(Error::Precondition(format!("need dt > 0 and t_max >= 0, got dt = {dt_fs}, t_max = {t_max_fs}")));
    }
    let steps = (t_max_fs / dt_fs + 1e-9).floor() as usize;
    if steps > 50_000_000 {
        return Err(Error::Limit(format!("{steps} time steps requested")));
    }
    Ok((0..=steps).map(|k| k as f64 * dt_fs).collect())
}

/// Single-excitation amplitudes on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeTrajectory {
    /// Times in fs.
    pub times: Vec<f64>,
    /// Emitter amplitude c_e(t) in the frame rotating at ω_eg.
    pub c_e: Vec<C64>,
    /// Mode amplitudes per time (model solvers only).
    pub c_modes: Option<Vec<Vec<C64>>>,
    /// Non-fatal diagnostics (coverage, resampling).
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl AmplitudeTrajectory {
    pub fn emitter_population(&self) -> Vec<f64> {
        self.c_e.iter().map(|&c| abs2(c)).collect()
    }

    /// |c_i(t)|², indexed `[time][mode]`.
    pub fn mode_populations(&self) -> Option<Vec<Vec<f64>>> {
        self.c_modes.as_ref().map(|m| m.iter().map(|row| row.iter().map(|&c| abs2(c)).collect()).collect())
    }

    /// |c_e|² + Σ|c_i|² at every time.
    pub fn norm(&self) -> Vec<f64> {
        let pe = self.emitter_population();
        match self.mode_populations() {
            Some(pm) => pe.iter().zip(&pm).map(|(e, m)| e + m.iter().sum::<f64>()).collect(),
            None => pe,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.c_modes.as_ref().and_then(|m| m.first()).map_or(0, Vec::len)
    }
}
