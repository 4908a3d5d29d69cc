//! Value types of the few-mode spectral model.

use num_traits::Zero;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::{cplx, Cplx, Real};

/// Few-mode model: symmetric mode energy/coupling matrix ω (eV), bath loss
/// rates κ (eV) and emitter couplings g (eV, dipole moment folded in).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters<T: Real> {
    omega: Mat<T>,
    kappa: Vec<T>,
    g: Vec<T>,
}

impl<T: Real> ModelParameters<T> {
    /// Validates and builds a parameter set. Errors name the offending entry.
    pub fn new(omega: Mat<T>, kappa: Vec<T>, g: Vec<T>) -> Result<Self> {
        let n = kappa.len();
        if n == 0 {
            return Err(Error::InvalidParameters("n_modes must be positive".into()));
        }
        if omega.rows() != n || omega.cols() != n {
            return Err(Error::InvalidParameters(format!(
                "omega is {}x{} but kappa has {} entries",
                omega.rows(),
                omega.cols(),
                n
            )));
        }
        if g.len() != n {
            return Err(Error::InvalidParameters(format!("g has {} entries, expected {n}", g.len())));
        }
        for i in 0..n {
            for j in 0..n {
                let v = omega[(i, j)];
                if !v.is_finite() {
                    return Err(Error::InvalidParameters(format!("omega[{i}][{j}] = {v} is not finite")));
                }
                if v != omega[(j, i)] {
                    return Err(Error::InvalidParameters(format!(
                        "omega[{i}][{j}] = {v} differs from omega[{j}][{i}] = {}",
                        omega[(j, i)]
                    )));
                }
            }
        }
        for (i, &k) in kappa.iter().enumerate() {
            if !k.is_finite() || k <= T::zero() {
                return Err(Error::InvalidParameters(format!("kappa[{i}] = {k} must be finite and > 0")));
            }
        }
        for (i, &gi) in g.iter().enumerate() {
            if !gi.is_finite() || gi < T::zero() {
                return Err(Error::InvalidParameters(format!("g[{i}] = {gi} must be finite and >= 0")));
            }
        }
        Ok(Self { omega, kappa, g })
    }

    /// Non-interacting model with ω = diag(energies).
    pub fn diagonal(energies: &[T], kappa: Vec<T>, g: Vec<T>) -> Result<Self> {
        let n = energies.len();
        let omega = Mat::from_fn(n, n, |i, j| if i == j { energies[i] } else { T::zero() });
        Self::new(omega, kappa, g)
    }

    pub fn n_modes(&self) -> usize {
        self.kappa.len()
    }

    pub fn omega(&self) -> &Mat<T> {
        &self.omega
    }

    pub fn kappa(&self) -> &[T] {
        &self.kappa
    }

    pub fn g(&self) -> &[T] {
        &self.g
    }

    pub fn mode_energies(&self) -> Vec<T> {
        (0..self.n_modes()).map(|i| self.omega[(i, i)]).collect()
    }

    /// True when every off-diagonal |ω_ij| is below `rel · max|ω|`.
    pub fn is_diagonal(&self, rel: T) -> bool {
        let n = self.n_modes();
        let scale = self.omega.as_slice().iter().fold(T::zero(), |m, v| m.max(v.abs()));
        (0..n).all(|i| (0..n).all(|j| i == j || self.omega[(i, j)].abs() < rel * scale))
    }

    /// Simultaneous relabeling of modes: new mode `k` is old mode `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n_modes();
        assert_eq!(perm.len(), n);
        Self {
            omega: Mat::from_fn(n, n, |i, j| self.omega[(perm[i], perm[j])]),
            kappa: perm.iter().map(|&p| self.kappa[p]).collect(),
            g: perm.iter().map(|&p| self.g[p]).collect(),
        }
    }

    /// Modes reordered by ascending ω_ii (stable).
    pub fn sorted_by_energy(&self) -> Self {
        let mut perm: Vec<usize> = (0..self.n_modes()).collect();
        perm.sort_by(|&a, &b| self.omega[(a, a)].partial_cmp(&self.omega[(b, b)]).unwrap_or(std::cmp::Ordering::Equal));
        self.permuted(&perm)
    }

    /// All energies (ω_ii) shifted by `delta`.
    pub fn shifted(&self, delta: T) -> Self {
        let mut omega = self.omega.clone();
        for i in 0..self.n_modes() {
            omega[(i, i)] += delta;
        }
        Self { omega, kappa: self.kappa.clone(), g: self.g.clone() }
    }

    /// Couplings multiplied by `s` (J scales by s²).
    pub fn scaled_couplings(&self, s: T) -> Self {
        Self { omega: self.omega.clone(), kappa: self.kappa.clone(), g: self.g.iter().map(|&v| v * s).collect() }
    }

    pub fn cast<U: Real>(&self) -> ModelParameters<U> {
        let n = self.n_modes();
        let c = |v: T| U::lit(v.to_f64_lossy());
        ModelParameters {
            omega: Mat::from_fn(n, n, |i, j| c(self.omega[(i, j)])),
            kappa: self.kappa.iter().map(|&v| c(v)).collect(),
            g: self.g.iter().map(|&v| c(v)).collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr<T> {
    n_modes: usize,
    omega: Vec<Vec<T>>,
    kappa: Vec<T>,
    g: Vec<T>,
}

impl<T: Real + Serialize> Serialize for ModelParameters<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ParamsRepr {
            n_modes: self.n_modes(),
            omega: self.omega.to_rows(),
            kappa: self.kappa.clone(),
            g: self.g.clone(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for ModelParameters<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ParamsRepr::<T>::deserialize(d)?;
        if r.omega.len() != r.n_modes || r.omega.iter().any(|row| row.len() != r.n_modes) {
            return Err(D::Error::custom(format!("omega must be {0}x{0} (n_modes = {0})", r.n_modes)));
        }
        if r.kappa.len() != r.n_modes || r.g.len() != r.n_modes {
            return Err(D::Error::custom(format!("kappa and g must have n_modes = {} entries", r.n_modes)));
        }
        ModelParameters::new(Mat::from_rows(&r.omega), r.kappa, r.g).map_err(D::Error::custom)
    }
}

/// H̃ = ω − (i/2) diag(κ). Complex symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian<T: Real> {
    entries: Mat<Cplx<T>>,
}

impl<T: Real> EffectiveHamiltonian<T> {
    pub fn from_params(params: &ModelParameters<T>) -> Self {
        let n = params.n_modes();
        let half = T::lit(0.5);
        let entries = Mat::from_fn(n, n, |i, j| {
            let im = if i == j { -half * params.kappa[i] } else { T::zero() };
            cplx(params.omega[(i, j)], im)
        });
        Self { entries }
    }

    pub fn entries(&self) -> &Mat<Cplx<T>> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    /// H̃ − ω·I for real ω.
    pub fn shifted(&self, omega: T) -> Mat<Cplx<T>> {
        let mut m = self.entries.clone();
        for i in 0..self.dim() {
            m[(i, i)] -= cplx(omega, T::zero());
        }
        m
    }
}

/// Sampled spectral density J(ω) on a strictly increasing positive grid (eV).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensityTable<T: Real> {
    omega: Vec<T>,
    j: Vec<T>,
}

impl<T: Real> SpectralDensityTable<T> {
    /// Builds a table, tolerating negative values down to `-1e-12·max(J)`.
    pub fn new(omega: Vec<T>, j: Vec<T>) -> Result<Self> {
        Self::with_tolerance(omega, j, T::lit(1e-12)).map(|(t, _)| t)
    }

    /// Builds a table; values in `[-neg_rel·max(J), 0)` are clamped to zero and
    /// counted in the second return value, larger negatives are rejected.
    pub fn with_tolerance(omega: Vec<T>, mut j: Vec<T>, neg_rel: T) -> Result<(Self, usize)> {
        if omega.len() != j.len() {
            return Err(Error::InvalidTable(format!("grid has {} points but J has {}", omega.len(), j.len())));
        }
        if omega.is_empty() {
            return Err(Error::InvalidTable("table is empty".into()));
        }
        for (k, &w) in omega.iter().enumerate() {
            if !w.is_finite() || w <= T::zero() {
                return Err(Error::InvalidTable(format!("omega[{k}] = {w} must be finite and > 0")));
            }
            if k > 0 && w <= omega[k - 1] {
                return Err(Error::InvalidTable(format!(
                    "omega grid not strictly increasing at index {k} ({} then {w})",
                    omega[k - 1]
                )));
            }
        }
        if let Some(k) = j.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidTable(format!("J[{k}] is not finite")));
        }
        let max = j.iter().fold(T::zero(), |m, &v| m.max(v));
        let floor = -neg_rel * max;
        let mut clamped = 0;
        for (k, v) in j.iter_mut().enumerate() {
            if *v < T::zero() {
                if *v < floor {
                    return Err(Error::InvalidTable(format!(
                        "J[{k}] = {} is negative beyond tolerance ({})",
                        *v, floor
                    )));
                }
                *v = T::zero();
                clamped += 1;
            }
        }
        Ok((Self { omega, j }, clamped))
    }

    pub fn omega(&self) -> &[T] {
        &self.omega
    }

    pub fn j(&self) -> &[T] {
        &self.j
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn max_j(&self) -> T {
        self.j.iter().fold(T::zero(), |m, &v| m.max(v))
    }

    /// Trapezoidal ∫J dω over the table.
    pub fn integral(&self) -> T {
        let half = T::lit(0.5);
        self.omega.windows(2).zip(self.j.windows(2)).map(|(w, j)| (w[1] - w[0]) * (j[0] + j[1]) * half).sum()
    }

    /// Trapezoid weights of the grid.
    pub fn trapezoid_weights(&self) -> Vec<T> {
        trapezoid_weights(&self.omega)
    }
}

pub(crate) fn trapezoid_weights<T: Real>(x: &[T]) -> Vec<T> {
    let n = x.len();
    let half = T::lit(0.5);
    let mut w = vec![T::zero(); n];
    for k in 0..n.saturating_sub(1) {
        let h = (x[k + 1] - x[k]) * half;
        w[k] += h;
        w[k + 1] += h;
    }
    w
}

/// Complex eigenvalues E_k of H̃ and residues λ_k² with λ_k = gᵀψ_k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct PoleSet<T: Real> {
    pub values: Vec<Cplx<T>>,
    pub residues: Vec<Cplx<T>>,
}

impl<T: Real> PoleSet<T> {
    pub fn residue_sum(&self) -> Cplx<T> {
        self.residues.iter().fold(Cplx::zero(), |a, &b| a + b)
    }
}
