use serde::{Serialize, Serializer};

use super::trajectory::AmplitudeTrajectory;
use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Mat};
use crate::model::ModelParameters;
use crate::scalar::{abs2, C64};

/// Eigenmodes of ω_ij: ω = v·diag(ω̃)·vᵀ, with eigenvectors as the columns of
/// `v`. The tilde operators are ã_α = Σ_i V_{αi} a_i with V = vᵀ.
#[derive(Debug, Clone, PartialEq)]
pub struct TildeBasis {
    pub v: Mat<f64>,
    /// Ascending.
    pub tilde_omega: Vec<f64>,
}

impl TildeBasis {
    pub fn n_modes(&self) -> usize {
        self.tilde_omega.len()
    }

    /// V_{αi}: row α holds the components of tilde mode α.
    pub fn transform_matrix(&self) -> Mat<f64> {
        self.v.transpose()
    }

    /// v·diag(ω̃)·vᵀ
    pub fn reconstruct(&self) -> Mat<f64> {
        let n = self.n_modes();
        Mat::from_fn(n, n, |i, j| (0..n).map(|a| self.v[(i, a)] * self.tilde_omega[a] * self.v[(j, a)]).sum())
    }

    /// c̃_α = Σ_i V_{αi} c_i
    pub fn to_tilde(&self, c: &[C64]) -> Vec<C64> {
        let n = self.n_modes();
        (0..n).map(|a| (0..n).map(|i| c[i] * self.v[(i, a)]).sum()).collect()
    }

    /// Inverse of [`to_tilde`](Self::to_tilde).
    pub fn from_tilde(&self, ct: &[C64]) -> Vec<C64> {
        let n = self.n_modes();
        (0..n).map(|i| (0..n).map(|a| ct[a] * self.v[(i, a)]).sum()).collect()
    }
}

impl Serialize for TildeBasis {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            tilde_omega: &'a [f64],
            v: Vec<Vec<f64>>,
        }
        Repr { tilde_omega: &self.tilde_omega, v: self.v.to_rows() }.serialize(s)
    }
}

pub fn tilde_transform(params: &ModelParameters<f64>) -> TildeBasis {
    let eig = symmetric_eigen(params.omega());
    TildeBasis { v: eig.vectors, tilde_omega: eig.values }
}

/// |c̃_α(t)|², indexed `[time][tilde mode]`.
pub fn tilde_populations(traj: &AmplitudeTrajectory, basis: &TildeBasis) -> Result<Vec<Vec<f64>>> {
    let modes =
        traj.c_modes.as_ref().ok_or_else(|| Error::Dimension("trajectory carries no mode amplitudes".into()))?;
    modes
        .iter()
        .map(|c| {
            if c.len() != basis.n_modes() {
                return Err(Error::Dimension(format!(
                    "trajectory has {} modes, tilde basis has {}",
                    c.len(),
                    basis.n_modes()
                )));
            }
            Ok(basis.to_tilde(c).into_iter().map(abs2).collect())
        })
        .collect()
}
