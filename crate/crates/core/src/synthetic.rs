//! Random and structured model generators used by the tests, the acceptance
//! suite and the CLI `--demo` mode.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::Mat;
use crate::model::{ModelParameters, SpectralDensityTable};
use crate::spectral::{jmod_table, linspace};
use crate::{ModelParams, Result, Spectrum};

/// Distribution of random interacting models.
///
/// ω_ii ~ U[energy], κ_i ~ log-uniform[kappa], g_i ~ U[coupling],
/// ω_ij ~ U[-offdiag, offdiag] for i < j.
#[derive(Debug, Clone, Copy)]
pub struct RandomModel {
    pub energy: (f64, f64),
    pub kappa: (f64, f64),
    pub coupling: (f64, f64),
    pub offdiag: f64,
}

impl Default for RandomModel {
    fn default() -> Self {
        Self { energy: (1.0, 1.6), kappa: (0.02, 0.2), coupling: (0.02, 0.08), offdiag: 0.05 }
    }
}

impl RandomModel {
    pub fn sample(&self, rng: &mut impl Rng, n: usize) -> ModelParams {
        let mut omega = Mat::zeros(n, n);
        for i in 0..n {
            omega[(i, i)] = rng.gen_range(self.energy.0..=self.energy.1);
        }
        for i in 0..n {
            for j in i + 1..n {
                let v = if self.offdiag > 0.0 { rng.gen_range(-self.offdiag..=self.offdiag) } else { 0.0 };
                omega[(i, j)] = v;
                omega[(j, i)] = v;
            }
        }
        let (klo, khi) = (self.kappa.0.ln(), self.kappa.1.ln());
        let kappa = (0..n).map(|_| rng.gen_range(klo..=khi).exp()).collect();
        let g = (0..n).map(|_| rng.gen_range(self.coupling.0..=self.coupling.1)).collect();
        ModelParameters::new(omega, kappa, g).expect("sampled parameters are valid")
    }

    pub fn sample_seeded(&self, seed: u64, n: usize) -> ModelParams {
        self.sample(&mut ChaCha8Rng::seed_from_u64(seed), n)
    }
}

/// Single Lorentzian mode sampled on a uniform grid.
pub fn lorentzian_table(omega0: f64, kappa: f64, g: f64, lo: f64, hi: f64, points: usize) -> Result<Spectrum> {
    let p = ModelParameters::diagonal(&[omega0], vec![kappa], vec![g])?;
    jmod_table(&p, &linspace(lo, hi, points))
}

/// Hybrid-cavity-like model: a few broad, strongly coupled modes hybridized
/// with a ladder of narrow, weakly coupled resonances. Produces many peaks
/// with Fano-like asymmetric profiles.
pub fn multi_resonance_params(n_modes: usize, seed: u64) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_broad = (n_modes / 6).max(1).min(n_modes);
    let n_narrow = n_modes - n_broad;
    let (lo, hi) = (0.9, 1.8);
    let mut energies = Vec::with_capacity(n_modes);
    let mut kappa = Vec::with_capacity(n_modes);
    let mut g = Vec::with_capacity(n_modes);
    for b in 0..n_broad {
        let e = lo + (hi - lo) * (b as f64 + 0.5) / n_broad as f64;
        energies.push(e + rng.gen_range(-0.05..0.05));
        kappa.push(rng.gen_range(0.15..0.3));
        g.push(rng.gen_range(0.08..0.12));
    }
    for k in 0..n_narrow {
        let e = lo + (hi - lo) * (k as f64 + 0.5) / n_narrow as f64;
        energies.push(e + rng.gen_range(-0.01..0.01));
        kappa.push(rng.gen_range(0.004..0.02));
        g.push(rng.gen_range(0.005..0.02));
    }
    let mut omega = Mat::zeros(n_modes, n_modes);
    for i in 0..n_modes {
        omega[(i, i)] = energies[i];
    }
    for b in 0..n_broad {
        for k in n_broad..n_modes {
            let v = rng.gen_range(0.005..0.02) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            omega[(b, k)] = v;
            omega[(k, b)] = v;
        }
    }
    ModelParameters::new(omega, kappa, g).expect("generator produces valid parameters").sorted_by_energy()
}

/// The demo spectrum: a 6-mode hybrid model sampled on 2001 points over [0.6, 2.2] eV.
pub fn demo_spectrum() -> (ModelParams, Spectrum) {
    let params = multi_resonance_params(6, 2024);
    let table: SpectralDensityTable<f64> = jmod_table(&params, &linspace(0.6, 2.2, 2001)).expect("demo grid is valid");
    (params, table)
}
