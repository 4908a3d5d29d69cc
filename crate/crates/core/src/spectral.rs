//! Model spectral density J_mod(ω) = (1/π)·Im{gᵀ(H̃ − ω)⁻¹g} and derived
//! quantities: poles, the non-interacting Lorentzian limit, Purcell factors.

use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{complex_eigen, LuFactor};
use crate::model::{EffectiveHamiltonian, ModelParameters, PoleSet, SpectralDensityTable};
use crate::scalar::{abs2, cabs, cplx, Cplx, Real};
use crate::tolerances::Tolerances;
use crate::units;

/// How J_mod is evaluated on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMethod {
    /// Resolvent for small problems, pole sum for N > 8 or grids above 10⁴ points.
    #[default]
    Auto,
    /// One LU solve of (H̃ − ω)x = g per grid point.
    Resolvent,
    /// One eigendecomposition of H̃, then Σ λ_k²/(E_k − ω).
    PoleSum,
}

const PAR_THRESHOLD: usize = 512;

pub fn build_effective_hamiltonian<T: Real>(params: &ModelParameters<T>) -> EffectiveHamiltonian<T> {
    EffectiveHamiltonian::from_params(params)
}

/// x = (H̃ − ω)⁻¹ g for real ω.
pub fn resolvent_vector<T: Real>(h: &EffectiveHamiltonian<T>, g: &[T], omega: T) -> Result<Vec<Cplx<T>>> {
    let lu =
        LuFactor::new(h.shifted(omega)).ok_or_else(|| Error::Numerical(format!("singular H̃ - ω at ω = {omega}")))?;
    let rhs: Vec<Cplx<T>> = g.iter().map(|&v| cplx(v, T::zero())).collect();
    Ok(lu.solve(&rhs))
}

fn jmod_point<T: Real>(h: &EffectiveHamiltonian<T>, g: &[T], omega: T) -> Result<T> {
    let x = resolvent_vector(h, g, omega)?;
    let im: T = g.iter().zip(&x).map(|(&gi, xi)| gi * xi.im).sum();
    Ok(im / T::PI())
}

fn map_grid<T: Real>(grid: &[T], f: impl Fn(T) -> Result<T> + Sync) -> Result<Vec<T>> {
    if grid.len() >= PAR_THRESHOLD {
        grid.par_iter().map(|&w| f(w)).collect()
    } else {
        grid.iter().map(|&w| f(w)).collect()
    }
}

/// J_mod on an arbitrary real grid with the default method.
pub fn evaluate_jmod<T: Real>(params: &ModelParameters<T>, grid: &[T]) -> Result<Vec<T>> {
    evaluate_jmod_with(params, grid, EvalMethod::Auto, &Tolerances::default())
}

pub fn evaluate_jmod_with<T: Real>(
    params: &ModelParameters<T>,
    grid: &[T],
    method: EvalMethod,
    tol: &Tolerances,
) -> Result<Vec<T>> {
    if let Some(w) = grid.iter().find(|w| !w.is_finite()) {
        return Err(Error::Precondition(format!("grid value {w} is not finite")));
    }
    let g = params.g();
    if g.iter().all(|v| v.is_zero()) {
        return Ok(vec![T::zero(); grid.len()]);
    }
    let use_poles = match method {
        EvalMethod::Resolvent => false,
        EvalMethod::PoleSum => true,
        EvalMethod::Auto => params.n_modes() > 8 || grid.len() > 10_000,
    };
    if use_poles {
        match compute_poles_with(params, tol).and_then(|p| refuse_degenerate(p, tol)) {
            Ok(poles) => return map_grid(grid, |w| Ok(pole_sum_point(&poles, w))),
            Err(e) if method == EvalMethod::PoleSum => return Err(e),
            Err(e) => log::debug!("pole-sum path unavailable ({e}); using resolvent"),
        }
    }
    let h = EffectiveHamiltonian::from_params(params);
    map_grid(grid, |w| jmod_point(&h, g, w))
}

/// J_mod as a validated table (grid must be positive and increasing).
pub fn jmod_table<T: Real>(params: &ModelParameters<T>, grid: &[T]) -> Result<SpectralDensityTable<T>> {
    let j = evaluate_jmod(params, grid)?;
    SpectralDensityTable::new(grid.to_vec(), j)
}

fn refuse_degenerate<T: Real>(poles: PoleSet<T>, tol: &Tolerances) -> Result<PoleSet<T>> {
    let thr = T::lit(tol.degenerate_pole_ev);
    for (a, pa) in poles.values.iter().enumerate() {
        for pb in &poles.values[a + 1..] {
            if cabs(*pa - *pb) < thr {
                return Err(Error::Numerical(format!(
                    "degenerate poles near {pa}; residue extraction is ill-conditioned"
                )));
            }
        }
    }
    Ok(poles)
}

fn pole_sum_point<T: Real>(poles: &PoleSet<T>, omega: T) -> T {
    let w = cplx(omega, T::zero());
    let s = poles.values.iter().zip(&poles.residues).fold(Cplx::<T>::zero(), |acc, (&e, &r)| acc + r / (e - w));
    s.im / T::PI()
}

/// J_mod(ω) = (1/π)·Im Σ_k λ_k²/(E_k − ω).
pub fn pole_sum_jmod<T: Real>(poles: &PoleSet<T>, grid: &[T]) -> Vec<T> {
    grid.iter().map(|&w| pole_sum_point(poles, w)).collect()
}

/// Closed-form sum of Lorentzians for a non-interacting (diagonal ω) model.
pub fn evaluate_lorentzian_sum<T: Real>(params: &ModelParameters<T>, grid: &[T]) -> Result<Vec<T>> {
    evaluate_lorentzian_sum_with(params, grid, &Tolerances::default())
}

pub fn evaluate_lorentzian_sum_with<T: Real>(
    params: &ModelParameters<T>,
    grid: &[T],
    tol: &Tolerances,
) -> Result<Vec<T>> {
    if !params.is_diagonal(T::lit(tol.diagonal_rel)) {
        return Err(Error::Precondition("Lorentzian sum needs a diagonal omega matrix".into()));
    }
    let energies = params.mode_energies();
    let half = T::lit(0.5);
    let quarter = T::lit(0.25);
    Ok(grid
        .iter()
        .map(|&w| {
            energies
                .iter()
                .zip(params.kappa())
                .zip(params.g())
                .map(|((&e, &k), &g)| {
                    let d = w - e;
                    g * g / T::PI() * (k * half) / (d * d + k * k * quarter)
                })
                .sum()
        })
        .collect())
}

pub fn compute_poles<T: Real>(params: &ModelParameters<T>) -> Result<PoleSet<T>> {
    compute_poles_with(params, &Tolerances::default())
}

/// Eigenvalues of H̃ with residues λ_k² (λ_k = gᵀψ_k, ψ_kᵀψ_k = 1), sorted by
/// ascending real part.
pub fn compute_poles_with<T: Real>(params: &ModelParameters<T>, tol: &Tolerances) -> Result<PoleSet<T>> {
    let h = EffectiveHamiltonian::from_params(params);
    let n = h.dim();
    let eig = complex_eigen(h.entries())?;
    let mut poles: Vec<(Cplx<T>, Cplx<T>)> = Vec::with_capacity(n);
    let mut worst = T::one();
    for k in 0..n {
        let mut psi: Vec<Cplx<T>> = (0..n).map(|i| eig.vectors[(i, k)]).collect();
        // bilinear self-product of a unit (Hermitian-norm) vector
        let b = psi.iter().fold(Cplx::<T>::zero(), |a, &v| a + v * v);
        let b_abs = cabs(b);
        let cond = if b_abs > T::zero() { T::one() / b_abs } else { T::infinity() };
        worst = worst.max(cond);
        if cond > T::lit(tol.max_eigvec_condition) {
            return Err(Error::Defective { condition: cond.to_f64_lossy() });
        }
        let s = b.sqrt();
        for v in &mut psi {
            *v /= s;
        }
        let big = psi.iter().enumerate().fold(0, |bi, (i, v)| if abs2(*v) > abs2(psi[bi]) { i } else { bi });
        if psi[big].re < T::zero() {
            for v in &mut psi {
                *v = -*v;
            }
        }
        let lambda = psi.iter().zip(params.g()).fold(Cplx::<T>::zero(), |a, (&v, &gi)| a + v * gi);
        poles.push((eig.values[k], lambda * lambda));
    }
    log::trace!("pole eigenvector condition {worst}");
    poles.sort_by(|a, b| a.0.re.partial_cmp(&b.0.re).unwrap_or(std::cmp::Ordering::Equal));
    Ok(PoleSet { values: poles.iter().map(|p| p.0).collect(), residues: poles.iter().map(|p| p.1).collect() })
}

/// P(ω) = J(ω)/J₀(ω) with J₀ the free-space spectral density for dipole `mu` (e·nm).
pub fn purcell_factor<T: Real>(table: &SpectralDensityTable<T>, mu_e_nm: f64) -> Result<Vec<T>> {
    if !(mu_e_nm > 0.0 && mu_e_nm.is_finite()) {
        return Err(Error::Precondition(format!("dipole moment must be > 0, got {mu_e_nm}")));
    }
    Ok(table
        .omega()
        .iter()
        .zip(table.j())
        .map(|(&w, &j)| T::lit(j.to_f64_lossy() / units::free_space_spectral_density(w.to_f64_lossy(), mu_e_nm)))
        .collect())
}

/// Densely sampled grid spanning the model's resonances: [min ω_ii − pad·max κ, max ω_ii + pad·max κ].
pub fn resonance_grid<T: Real>(params: &ModelParameters<T>, pad: T, points: usize) -> Vec<T> {
    let e = params.mode_energies();
    let kmax = params.kappa().iter().fold(T::zero(), |m, &v| m.max(v));
    let lo = e.iter().fold(T::infinity(), |m, &v| m.min(v)) - pad * kmax;
    let hi = e.iter().fold(T::neg_infinity(), |m, &v| m.max(v)) + pad * kmax;
    linspace(lo, hi, points)
}

pub fn linspace<T: Real>(lo: T, hi: T, points: usize) -> Vec<T> {
    if points == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / T::lit((points - 1) as f64);
    (0..points).map(|k| lo + step * T::lit(k as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;

    fn one_mode() -> ModelParameters<f64> {
        ModelParameters::diagonal(&[1.0], vec![0.1], vec![0.05]).unwrap()
    }

    #[test]
    fn single_lorentzian_peak_value() {
        let expect = 0.05 / std::f64::consts::PI;
        let j = evaluate_jmod(&one_mode(), &[1.0]).unwrap();
        assert!((j[0] - expect).abs() < 1e-15);
        assert!((j[0] - 0.015_915_5).abs() < 1e-7);
        let l = evaluate_lorentzian_sum(&one_mode(), &[1.0, 0.95, 1.05]).unwrap();
        assert!((l[0] - expect).abs() < 1e-15);
        assert!((l[1] - expect / 2.0).abs() < 1e-15);
        assert!((l[2] - expect / 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_coupling_is_zero() {
        let p = ModelParameters::diagonal(&[1.0, 1.5], vec![0.1, 0.2], vec![0.0, 0.0]).unwrap();
        let j = evaluate_jmod(&p, &linspace(-3.0, 3.0, 101)).unwrap();
        assert!(j.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn diagonal_model_is_additive() {
        let both = ModelParameters::<f64>::diagonal(&[1.0, 1.3], vec![0.1, 0.05], vec![0.05, 0.02]).unwrap();
        let a = ModelParameters::diagonal(&[1.0], vec![0.1], vec![0.05]).unwrap();
        let b = ModelParameters::diagonal(&[1.3], vec![0.05], vec![0.02]).unwrap();
        let grid = linspace(0.5, 2.0, 301);
        let jb = evaluate_jmod(&both, &grid).unwrap();
        let ja = evaluate_jmod(&a, &grid).unwrap();
        let jc = evaluate_jmod(&b, &grid).unwrap();
        for k in 0..grid.len() {
            assert!((jb[k] - ja[k] - jc[k]).abs() <= 1e-14 * jb[k].abs().max(1e-300) + 1e-18);
        }
    }

    #[test]
    fn lorentzian_sum_rejects_interacting() {
        let p = ModelParameters::new(Mat::from_rows(&[vec![1.0, 0.1], vec![0.1, 1.2]]), vec![0.1, 0.1], vec![0.1, 0.1])
            .unwrap();
        assert!(matches!(evaluate_lorentzian_sum(&p, &[1.0]), Err(Error::Precondition(_))));
    }

    #[test]
    fn two_mode_closed_form() {
        // gᵀ(H̃−ω)⁻¹g = (g₁²d₂ + g₂²d₁ − 2g₁g₂ω₁₂)/(d₁d₂ − ω₁₂²), d_i = ω_ii − iκ_i/2 − ω
        let (w1, w2, w12, k1, k2, g1, g2) = (1.1, 1.3, 0.04, 0.2, 0.01, 0.08, 0.02);
        let p = ModelParameters::<f64>::new(Mat::from_rows(&[vec![w1, w12], vec![w12, w2]]), vec![k1, k2], vec![g1, g2])
            .unwrap();
        let grid: Vec<f64> = linspace(0.8, 1.6, 801);
        let j = evaluate_jmod(&p, &grid).unwrap();
        for (w, v) in grid.iter().zip(&j) {
            let d1 = cplx(w1 - w, -k1 / 2.0);
            let d2 = cplx(w2 - w, -k2 / 2.0);
            let f = (d2 * (g1 * g1) + d1 * (g2 * g2) - cplx(2.0 * g1 * g2 * w12, 0.0)) / (d1 * d2 - cplx(w12 * w12, 0.0));
            let want = f.im / std::f64::consts::PI;
            assert!((v - want).abs() < 1e-13 * want.abs().max(1e-3), "ω = {w}: {v} vs {want}");
        }
    }

    #[test]
    fn poles_small_cases() {
        let poles = compute_poles(&one_mode()).unwrap();
        assert!((poles.values[0] - cplx(1.0, -0.05)).norm() < 1e-15);
        assert!((poles.residues[0] - cplx(0.0025, 0.0)).norm() < 1e-15);

        let p = ModelParameters::diagonal(&[2.0, 1.0], vec![0.2, 0.1], vec![0.1, 0.1]).unwrap();
        let poles = compute_poles(&p).unwrap();
        assert!((poles.values[0] - cplx(1.0, -0.05)).norm() < 1e-15);
        assert!((poles.values[1] - cplx(2.0, -0.1)).norm() < 1e-15);

        // equal losses: H̃ = real symmetric − (i/2)κ I, eigenvalues 1 ± 0.05 − 0.005i
        let p = ModelParameters::<f64>::new(
            Mat::from_rows(&[vec![1.0, 0.05], vec![0.05, 1.0]]),
            vec![0.01, 0.01],
            vec![0.03, 0.01],
        )
        .unwrap();
        let poles = compute_poles(&p).unwrap();
        assert!((poles.values[0] - cplx(0.95, -0.005)).norm() < 1e-14);
        assert!((poles.values[1] - cplx(1.05, -0.005)).norm() < 1e-14);
        let sum = poles.residue_sum();
        assert!(sum.im.abs() < 1e-10 * sum.re.abs());
        assert!((sum.re - (0.03f64.powi(2) + 0.01f64.powi(2))).abs() < 1e-14);
    }

    #[test]
    fn purcell_scaling_and_identity() {
        let grid = linspace(0.5, 2.0, 11);
        let j0: Vec<f64> = grid.iter().map(|&w| units::free_space_spectral_density(w, 0.55)).collect();
        let t = SpectralDensityTable::new(grid.clone(), j0).unwrap();
        let p = purcell_factor(&t, 0.55).unwrap();
        assert!(p.iter().all(|&v| (v - 1.0).abs() < 1e-14));
        let p2 = purcell_factor(&t, 1.1).unwrap();
        for (a, b) in p.iter().zip(&p2) {
            assert!((b / a - 0.25).abs() < 1e-14);
        }
        assert!(purcell_factor(&t, 0.0).is_err());
        assert!(purcell_factor(&t, -1.0).is_err());
    }

    #[test]
    fn free_space_density_at_emitter_energy() {
        // ω³μ²/(6π²ħε₀c³) evaluated in SI with CODATA 2022 constants, expressed in eV.
        let reference = 1.805_897_496_738_318_8e-8;
        let j0 = units::free_space_spectral_density(1.145, 0.55);
        assert!((j0 / reference - 1.0).abs() < 1e-12, "{j0:e}");
        let t = SpectralDensityTable::new(vec![1.145], vec![3.0 * reference]).unwrap();
        let p = purcell_factor(&t, 0.55).unwrap();
        assert!((p[0] - 3.0).abs() < 1e-11);
    }

    #[test]
    fn f32_evaluation_agrees_with_f64() {
        let p64 = ModelParameters::new(
            Mat::from_rows(&[vec![1.0, 0.02], vec![0.02, 1.1]]),
            vec![0.05, 0.08],
            vec![0.03, 0.04],
        )
        .unwrap();
        let p32: ModelParameters<f32> = p64.cast();
        let grid64 = linspace(0.8, 1.3, 51);
        let grid32: Vec<f32> = grid64.iter().map(|&w| w as f32).collect();
        let j64 = evaluate_jmod(&p64, &grid64).unwrap();
        let j32 = evaluate_jmod(&p32, &grid32).unwrap();
        let peak = j64.iter().cloned().fold(0.0, f64::max);
        for (a, b) in j64.iter().zip(&j32) {
            assert!((a - *b as f64).abs() < 1e-4 * peak);
        }
    }
}
