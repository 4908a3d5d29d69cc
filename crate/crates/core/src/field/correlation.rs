use crate::dynamics::{solve_fewmode_single_excitation_with, EmitterSpec};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::ModelParameters;
use crate::scalar::C64;
use crate::tolerances::Tolerances;
use crate::units::fs_to_internal;

/// Two-time dipole correlation ⟨μ̂(t′)μ̂(t″)⟩ in (e·nm)² on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationTable {
    /// C(t′,t″) = f*(t′)·f(t″).
    Rank1 { times: Vec<f64>, f: Vec<C64> },
    /// Arbitrary Hermitian table, `values[(t′, t″)]`.
    Dense { times: Vec<f64>, values: Mat<C64> },
}

impl CorrelationTable {
    pub fn rank1(times: Vec<f64>, f: Vec<C64>) -> Result<Self> {
        if times.len() != f.len() {
            return Err(Error::Dimension(format!("{} times but {} amplitudes", times.len(), f.len())));
        }
        check_grid(&times)?;
        Ok(Self::Rank1 { times, f })
    }

    /// Validates Hermitian symmetry and a real non-negative diagonal to
    /// `rel`·max|C|.
    pub fn dense(times: Vec<f64>, values: Mat<C64>, rel: f64) -> Result<Self> {
        let n = times.len();
        if values.rows() != n || values.cols() != n {
            return Err(Error::Dimension(format!("correlation is {}x{} on {n} times", values.rows(), values.cols())));
        }
        check_grid(&times)?;
        let scale = values.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
        for i in 0..n {
            if values[(i, i)].im.abs() > rel * scale || values[(i, i)].re < -rel * scale {
                return Err(Error::InvalidTable(format!("diagonal entry {i} is not real non-negative")));
            }
            for j in 0..i {
                if (values[(i, j)] - values[(j, i)].conj()).norm() > rel * scale {
                    return Err(Error::InvalidTable(format!("correlation not Hermitian at ({i}, {j})")));
                }
            }
        }
        Ok(Self::Dense { times, values })
    }

    pub fn times(&self) -> &[f64] {
        match self {
            Self::Rank1 { times, .. } | Self::Dense { times, .. } => times,
        }
    }

    pub fn len(&self) -> usize {
        self.times().len()
    }

    pub fn is_empty(&self) -> bool {
        self.times().is_empty()
    }

    pub fn is_rank1(&self) -> bool {
        matches!(self, Self::Rank1 { .. })
    }

    pub fn value(&self, i: usize, j: usize) -> C64 {
        match self {
            Self::Rank1 { f, .. } => f[i].conj() * f[j],
            Self::Dense { values, .. } => values[(i, j)],
        }
    }

    /// C(t,t)
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i, i).re).collect()
    }

    pub fn to_dense(&self) -> Self {
        match self {
            Self::Dense { .. } => self.clone(),
            Self::Rank1 { times, .. } => {
                let n = times.len();
                Self::Dense { times: times.clone(), values: Mat::from_fn(n, n, |i, j| self.value(i, j)) }
            }
        }
    }

    /// Multiplies every entry by `factor` (e.g. μ² for a dipole in e·nm).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return Err(Error::Precondition(format!("correlation scale must be >= 0, got {factor}")));
        }
        Ok(match self {
            Self::Rank1 { times, f } => {
                let s = factor.sqrt();
                Self::Rank1 { times: times.clone(), f: f.iter().map(|z| z * s).collect() }
            }
            Self::Dense { times, values } => {
                let n = times.len();
                Self::Dense { times: times.clone(), values: Mat::from_fn(n, n, |i, j| values[(i, j)] * factor) }
            }
        })
    }
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Dimension("correlation has no times".into()));
    }
    if times[0] != 0.0 {
        return Err(Error::Precondition("correlation grid must start at t = 0".into()));
    }
    if times.len() > 1 {
        let dt = times[1] - times[0];
        for (k, w) in times.windows(2).enumerate() {
            if !(w[1] > w[0]) || ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0) {
                return Err(Error::Precondition(format!("correlation grid is not uniform at index {}", k + 1)));
            }
        }
    }
    Ok(())
}

/// Normally ordered correlation ⟨σ⁺(t′)σ⁻(t″)⟩ = c_e*(t′)c_e(t″)e^{iω_eg(t′−t″)}
/// for spontaneous emission into the vacuum, with c_e from the few-mode
/// solver. Scale by μ² (e·nm) with [`CorrelationTable::scaled`].
pub fn emitter_correlation(
    params: &ModelParameters<f64>,
    emitter: &EmitterSpec,
    t_max_fs: f64,
    dt_fs: f64,
    tol: &Tolerances,
) -> Result<CorrelationTable> {
    let traj = solve_fewmode_single_excitation_with(params, emitter, t_max_fs, dt_fs, tol)?;
    let f = traj
        .times
        .iter()
        .zip(&traj.c_e)
        .map(|(&t, &c)| c * C64::new(0.0, -emitter.omega_eg * fs_to_internal(t)).exp())
        .collect();
    CorrelationTable::rank1(traj.times, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::RandomModel;

    #[test]
    fn rank1_structure() {
        let p = RandomModel::default().sample_seeded(2, 2);
        let e = EmitterSpec::excited(1.2);
        let c = emitter_correlation(&p, &e, 50.0, 0.5, &Tolerances::default()).unwrap();
        let traj = crate::dynamics::solve_fewmode_single_excitation(&p, &e, 50.0, 0.5).unwrap();
        for (d, pe) in c.diagonal().iter().zip(traj.emitter_population()) {
            assert!((d - pe).abs() < 1e-12);
        }
        for (i, j) in [(3, 40), (10, 99), (0, 7)] {
            let lhs = c.value(i, j) * c.value(j, i);
            assert!((lhs.re - c.value(i, j).norm_sqr()).abs() < 1e-14 && lhs.im.abs() < 1e-14);
        }
        let dense = c.to_dense();
        assert!(!dense.is_rank1());
        if let CorrelationTable::Dense { times, values } = dense {
            assert!(CorrelationTable::dense(times, values, 1e-14).is_ok());
        }
    }

    #[test]
    fn uncoupled_emitter_is_bare_phase() {
        let p = ModelParameters::diagonal(&[1.0], vec![0.1], vec![0.0]).unwrap();
        let e = EmitterSpec::excited(1.3);
        let c = emitter_correlation(&p, &e, 20.0, 0.5, &Tolerances::default()).unwrap();
        let t = c.times().to_vec();
        for (i, j) in [(1, 5), (30, 2), (40, 40)] {
            let expected = C64::new(0.0, 1.3 * fs_to_internal(t[i] - t[j])).exp();
            assert!((c.value(i, j) - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn scaling_and_validation() {
        let c = CorrelationTable::rank1(vec![0.0, 1.0], vec![C64::new(1.0, 0.0), C64::new(0.0, 0.5)]).unwrap();
        let s = c.scaled(4.0).unwrap();
        assert!((s.value(0, 1) - c.value(0, 1) * 4.0).norm() < 1e-15);
        assert!(c.scaled(-1.0).is_err());
        let bad = Mat::from_rows(&[
            vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)],
            vec![C64::new(0.0, 1.0), C64::new(1.0, 0.0)],
        ]);
        assert!(CorrelationTable::dense(vec![0.0, 1.0], bad, 1e-12).is_err());
        assert!(CorrelationTable::rank1(vec![0.0, 1.0, 3.0], vec![C64::new(1.0, 0.0); 3]).is_err());
    }
}
