use serde::{Deserialize, Serialize};

use super::trajectory::{time_grid, EmitterSpec};
use crate::error::{Error, Result};
use crate::model::ModelParameters;
use crate::scalar::C64;
use crate::tolerances::Tolerances;
use crate::units::fs_to_internal;

/// Validation ceiling on 2·(cutoff+1)^N.
pub const MAX_HILBERT_DIM: usize = 4096;

/// Emitter–mode coupling used by the dense solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// (σ⁺ + σ⁻) Σ g_i (a_i + a_i†), propagated in the lab frame.
    #[default]
    Full,
    /// σ⁺ Σ g_i a_i + h.c., propagated in the frame rotating at ω_eg.
    RotatingWave,
}

/// Expectation values from the dense master equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LindbladTraces {
    pub times: Vec<f64>,
    /// ⟨σ⁺σ⁻⟩(t)
    pub emitter_population: Vec<f64>,
    /// ⟨a_i†a_i⟩(t), indexed `[time][mode]`.
    pub mode_populations: Vec<Vec<f64>>,
    /// max_t |tr ρ(t) − 1|
    pub max_trace_error: f64,
    pub coupling: Coupling,
    pub fock_cutoff: usize,
}

struct Space {
    levels: usize,
    n_modes: usize,
    mode_dim: usize,
}

impl Space {
    fn dim(&self) -> usize {
        2 * self.mode_dim
    }

    fn occupation(&self, idx: usize, mode: usize) -> usize {
        (idx % self.mode_dim) / self.levels.pow(mode as u32) % self.levels
    }

    fn excited(&self, idx: usize) -> bool {
        idx >= self.mode_dim
    }

    /// Index after changing mode `i` by `delta` quanta, if within the cutoff.
    fn shift(&self, idx: usize, mode: usize, delta: isize) -> Option<usize> {
        let n = self.occupation(idx, mode) as isize + delta;
        if n < 0 || n >= self.levels as isize {
            return None;
        }
        let stride = self.levels.pow(mode as u32) as isize;
        Some((idx as isize + delta * stride) as usize)
    }

    fn flip(&self, idx: usize) -> usize {
        if self.excited(idx) {
            idx - self.mode_dim
        } else {
            idx + self.mode_dim
        }
    }
}

pub fn solve_lindblad_dense(
    params: &ModelParameters<f64>,
    emitter: &EmitterSpec,
    fock_cutoff: usize,
    t_max_fs: f64,
    dt_fs: f64,
    coupling: Coupling,
) -> Result<LindbladTraces> {
    solve_lindblad_dense_with(params, emitter, fock_cutoff, t_max_fs, dt_fs, coupling, &Tolerances::default())
}

/// Density-matrix propagation of the few-mode master equation with one
/// dissipator κ_i L[a_i] per mode, on the Fock space truncated at
/// `fock_cutoff` quanta per mode. Fixed-step RK4.
pub fn solve_lindblad_dense_with(
    params: &ModelParameters<f64>,
    emitter: &EmitterSpec,
    fock_cutoff: usize,
    t_max_fs: f64,
    dt_fs: f64,
    coupling: Coupling,
    tol: &Tolerances,
) -> Result<LindbladTraces> {
    emitter.validate()?;
    if fock_cutoff == 0 {
        return Err(Error::Precondition("fock cutoff must be at least 1".into()));
    }
    let n = params.n_modes();
    let levels = fock_cutoff + 1;
    let mode_dim = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(levels).filter(|&d| 2 * d <= MAX_HILBERT_DIM));
    let mode_dim = mode_dim.ok_or_else(|| {
        Error::Limit(format!("Hilbert space 2*({levels})^{n} exceeds the ceiling of {MAX_HILBERT_DIM} states"))
    })?;
    let space = Space { levels, n_modes: n, mode_dim };
    let d = space.dim();
    let times = time_grid(t_max_fs, dt_fs)?;

    let shift = match coupling {
        Coupling::Full => 0.0,
        Coupling::RotatingWave => emitter.omega_eg,
    };
    let (h_rows, jumps) = build_generator(params, emitter.omega_eg - shift, shift, coupling, &space);

    // Gershgorin bound on the Liouvillian spectrum
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (k, row) in h_rows.iter().enumerate() {
        let mut diag = 0.0;
        let mut radius = 0.0;
        for &(col, v) in row {
            if col == k {
                diag += v.re;
            } else {
                radius += v.norm();
            }
        }
        lo = f64::min(lo, diag - radius);
        hi = f64::max(hi, diag + radius);
    }
    let loss: f64 = params.kappa().iter().sum::<f64>() * fock_cutoff as f64;
    let bound = (hi - lo) + loss;
    let dt_nat = fs_to_internal(dt_fs);
    let substeps = ((dt_nat * bound / tol.rk4_phase_per_step).ceil() as usize).max(1);
    let h = dt_nat / substeps as f64;
    let total_steps = substeps.saturating_mul(times.len().saturating_sub(1));
    let work =
        (total_steps as f64) * (d * d) as f64 * (1.0 + h_rows.iter().map(Vec::len).sum::<usize>() as f64 / d as f64);
    if work > 1e14 {
        return Err(Error::Limit(format!("dense propagation would need ~{work:.1e} operations")));
    }
    log::debug!("dense master equation: dim {d}, {substeps} RK4 substeps per output step (h = {h:.3e})");

    let zero = C64::new(0.0, 0.0);
    let mut rho = vec![zero; d * d];
    let start = space.mode_dim; // |e, 0…0⟩
    rho[start * d + start] = C64::new(1.0, 0.0);

    let mut ws = Workspace::new(d);
    let mut out_pe = Vec::with_capacity(times.len());
    let mut out_modes = Vec::with_capacity(times.len());
    let mut max_trace_error: f64 = 0.0;
    for step in 0..times.len() {
        if step > 0 {
            for _ in 0..substeps {
                rk4_step(&mut rho, h, &h_rows, &jumps, params.kappa(), &mut ws);
            }
        }
        let mut trace = 0.0;
        let mut pe = 0.0;
        let mut modes = vec![0.0; n];
        for k in 0..d {
            let p = rho[k * d + k].re;
            trace += p;
            if space.excited(k) {
                pe += p;
            }
            for (i, m) in modes.iter_mut().enumerate() {
                *m += p * space.occupation(k, i) as f64;
            }
        }
        let err = (trace - 1.0).abs();
        if !err.is_finite() || err > tol.trace_drift {
            return Err(Error::Numerical(format!(
                "trace of the density matrix drifted by {err:.3e} at t = {} fs",
                times[step]
            )));
        }
        max_trace_error = max_trace_error.max(err);
        out_pe.push(pe);
        out_modes.push(modes);
    }

    Ok(LindbladTraces {
        times,
        emitter_population: out_pe,
        mode_populations: out_modes,
        max_trace_error,
        coupling,
        fock_cutoff,
    })
}

type SparseRows = Vec<Vec<(usize, C64)>>;
/// Per mode: (from, to, amplitude) entries of a_i.
type Jumps = Vec<Vec<(usize, usize, f64)>>;

/// Non-Hermitian generator H − (i/2)Σκ_i a_i†a_i as sparse rows, plus the
/// annihilation operators for the jump terms.
fn build_generator(
    params: &ModelParameters<f64>,
    emitter_energy: f64,
    shift: f64,
    coupling: Coupling,
    space: &Space,
) -> (SparseRows, Jumps) {
    let d = space.dim();
    let n = space.n_modes;
    let omega = params.omega();
    let mut rows: SparseRows = vec![Vec::new(); d];
    for from in 0..d {
        let mut diag = C64::new(if space.excited(from) { emitter_energy } else { 0.0 }, 0.0);
        for i in 0..n {
            let ni = space.occupation(from, i) as f64;
            diag += C64::new((omega[(i, i)] - shift) * ni, -0.5 * params.kappa()[i] * ni);
        }
        rows[from].push((from, diag));
        for i in 0..n {
            for j in 0..n {
                if i == j || omega[(i, j)] == 0.0 {
                    continue;
                }
                // a_i† a_j
                let nj = space.occupation(from, j);
                if let Some(mid) = space.shift(from, j, -1) {
                    if let Some(to) = space.shift(mid, i, 1) {
                        let ni = space.occupation(mid, i);
                        let amp = omega[(i, j)] * ((nj * (ni + 1)) as f64).sqrt();
                        rows[to].push((from, C64::new(amp, 0.0)));
                    }
                }
            }
            let g = params.g()[i];
            if g == 0.0 {
                continue;
            }
            let flipped = space.flip(from);
            let raising = !space.excited(from);
            for delta in [-1isize, 1] {
                let allowed = match coupling {
                    Coupling::Full => true,
                    // σ⁺a_i or σ⁻a_i†
                    Coupling::RotatingWave => (raising && delta == -1) || (!raising && delta == 1),
                };
                if !allowed {
                    continue;
                }
                let ni = space.occupation(from, i);
                if let Some(to) = space.shift(flipped, i, delta) {
                    let amp = if delta < 0 { (ni as f64).sqrt() } else { ((ni + 1) as f64).sqrt() };
                    rows[to].push((from, C64::new(g * amp, 0.0)));
                }
            }
        }
    }
    let jumps = (0..n)
        .map(|i| {
            (0..d)
                .filter_map(|from| {
                    let ni = space.occupation(from, i);
                    space.shift(from, i, -1).map(|to| (from, to, (ni as f64).sqrt()))
                })
                .collect()
        })
        .collect();
    (rows, jumps)
}

struct Workspace {
    d: usize,
    a: Vec<C64>,
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
}

impl Workspace {
    fn new(d: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); d * d];
        Self { d, a: z.clone(), k: [z.clone(), z.clone(), z.clone(), z.clone()], tmp: z }
    }
}

/// dρ/dt = −i(H̃ρ − ρH̃†) + Σ κ_i a_i ρ a_i†, using ρ = ρ†.
fn rhs(rho: &[C64], out: &mut [C64], a: &mut [C64], d: usize, rows: &SparseRows, jumps: &Jumps, kappa: &[f64]) {
    for (k, row) in rows.iter().enumerate() {
        let dst = &mut a[k * d..(k + 1) * d];
        dst.fill(C64::new(0.0, 0.0));
        for &(m, v) in row {
            let src = &rho[m * d..(m + 1) * d];
            for (x, &r) in dst.iter_mut().zip(src) {
                *x += v * r;
            }
        }
    }
    for k in 0..d {
        for l in 0..d {
            let z = a[k * d + l] - a[l * d + k].conj();
            out[k * d + l] = C64::new(z.im, -z.re);
        }
    }
    for (jump, &kap) in jumps.iter().zip(kappa) {
        if kap == 0.0 {
            continue;
        }
        for &(b, k, ab) in jump {
            for &(c, l, ac) in jump {
                out[k * d + l] += rho[b * d + c] * (kap * ab * ac);
            }
        }
    }
}

fn rk4_step(rho: &mut [C64], h: f64, rows: &SparseRows, jumps: &Jumps, kappa: &[f64], ws: &mut Workspace) {
    let d = ws.d;
    let Workspace { a, k, tmp, .. } = ws;
    let [k1, k2, k3, k4] = k;
    rhs(rho, k1, a, d, rows, jumps, kappa);
    for ((t, r), x) in tmp.iter_mut().zip(rho.iter()).zip(k1.iter()) {
        *t = r + x * (0.5 * h);
    }
    rhs(tmp, k2, a, d, rows, jumps, kappa);
    for ((t, r), x) in tmp.iter_mut().zip(rho.iter()).zip(k2.iter()) {
        *t = r + x * (0.5 * h);
    }
    rhs(tmp, k3, a, d, rows, jumps, kappa);
    for ((t, r), x) in tmp.iter_mut().zip(rho.iter()).zip(k3.iter()) {
        *t = r + x * h;
    }
    rhs(tmp, k4, a, d, rows, jumps, kappa);
    for i in 0..rho.len() {
        rho[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
    }
}
