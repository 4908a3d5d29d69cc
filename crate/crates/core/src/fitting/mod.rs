//! Two-stage least-squares fit of the few-mode model to a tabulated spectral
//! density: a non-interacting (sum of Lorentzians) fit seeded from the peaks of
//! the data, then a refinement over the full symmetric ω matrix.

mod init;
mod lm;
mod peaks;
mod residual;

pub use init::init_noninteracting;
pub use lm::Termination;
pub use peaks::{detect_peaks, Peak};
pub use residual::{Layout, Linearization, SpectrumResidual, WeightMode};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{compute_poles, evaluate_jmod};
use crate::{ModelParams, Poles, Spectrum};
use lm::{minimize, LmSettings};

/// Practical ceiling on the number of modes.
pub const MAX_MODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeCount {
    Fixed(usize),
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    NonInteracting,
    Interacting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub n_modes: ModeCount,
    pub max_iterations: usize,
    /// Relative cost decrease below which an accepted step ends the fit.
    pub relative_tolerance: f64,
    pub weight_mode: WeightMode,
    /// Minimum peak prominence as a fraction of max J.
    pub peak_prominence: f64,
    pub seed: u64,
    /// Extra randomized starts of the interacting stage when the target is missed.
    pub restarts: usize,
    /// Relative L2 error regarded as a successful fit.
    pub target_error: f64,
    /// Use the central finite-difference Jacobian instead of the analytic one.
    pub finite_difference_jacobian: bool,
    /// Upper bound on N in auto mode.
    pub max_modes: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            n_modes: ModeCount::Auto,
            max_iterations: 2000,
            relative_tolerance: 1e-10,
            weight_mode: WeightMode::Relative,
            peak_prominence: 0.01,
            seed: 0,
            restarts: 4,
            target_error: 1e-6,
            finite_difference_jacobian: false,
            max_modes: 24,
        }
    }
}

impl FitConfig {
    pub fn with_modes(n: usize) -> Self {
        Self { n_modes: ModeCount::Fixed(n), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if let ModeCount::Fixed(n) = self.n_modes {
            if n == 0 || n > MAX_MODES {
                return Err(Error::Precondition(format!("n_modes must be in 1..={MAX_MODES}, got {n}")));
            }
        }
        if !(self.relative_tolerance > 0.0) || !(self.target_error > 0.0) || !(self.peak_prominence > 0.0) {
            return Err(Error::Precondition("tolerances must be > 0".into()));
        }
        if self.max_modes == 0 || self.max_modes > MAX_MODES {
            return Err(Error::Precondition(format!("max_modes must be in 1..={MAX_MODES}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Fitted model, modes sorted by ascending ω_ii.
    pub params: ModelParams,
    pub cost_history: Vec<f64>,
    /// ‖J_fit − J_data‖₂ / ‖J_data‖₂.
    pub relative_l2_error: f64,
    /// max |J_fit − J_data| / max J_data.
    pub max_pointwise_error: f64,
    pub poles: Poles,
    pub stage: Stage,
    /// Optimizer iterations, rejected trial steps included.
    pub iterations_used: usize,
    pub accepted_steps: usize,
    pub termination: Termination,
    pub converged: bool,
    pub flags: Vec<String>,
}

impl FitReport {
    /// Recomputes the relative L2 error of `params` against `table`.
    pub fn recompute_error(&self, table: &Spectrum) -> Result<f64> {
        let fit = evaluate_jmod(&self.params, table.omega())?;
        Ok(SpectrumResidual::quality(table, &fit).0)
    }
}

fn validate_table(table: &Spectrum) -> Result<()> {
    if table.len() < 5 {
        return Err(Error::InvalidTable(format!("need at least 5 samples to fit, got {}", table.len())));
    }
    Ok(())
}

fn degenerate_report(table: &Spectrum, n: usize, stage: Stage) -> Result<FitReport> {
    let x = table.omega();
    let span = x[x.len() - 1] - x[0];
    let energies: Vec<f64> = (0..n).map(|i| x[0] + span * (i as f64 + 0.5) / n as f64).collect();
    let kappa = vec![(span / n as f64).max(f64::MIN_POSITIVE); n];
    let params = ModelParams::diagonal(&energies, kappa, vec![0.0; n])?;
    finish(
        table,
        params,
        vec![0.0],
        0,
        0,
        Termination::Degenerate,
        stage,
        vec!["degenerate_fit: all-zero spectral density".into()],
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    table: &Spectrum,
    params: ModelParams,
    cost_history: Vec<f64>,
    iterations: usize,
    accepted: usize,
    termination: Termination,
    stage: Stage,
    mut flags: Vec<String>,
) -> Result<FitReport> {
    let params = params.sorted_by_energy();
    let fit = evaluate_jmod(&params, table.omega())?;
    let (rel, pw) = SpectrumResidual::quality(table, &fit);
    let poles = match compute_poles(&params) {
        Ok(p) => p,
        Err(e) => {
            flags.push(format!("poles_unavailable: {e}"));
            Poles { values: vec![], residues: vec![] }
        }
    };
    if termination == Termination::MaxIterations {
        flags.push("max_iterations_reached".into());
    }
    if termination == Termination::Stationary {
        flags.push("stationary: damping ceiling reached without further decrease".into());
    }
    Ok(FitReport {
        params,
        cost_history,
        relative_l2_error: rel,
        max_pointwise_error: pw,
        poles,
        stage,
        iterations_used: iterations,
        accepted_steps: accepted,
        termination,
        converged: termination.converged(),
        flags,
    })
}

fn run(
    table: &Spectrum,
    config: &FitConfig,
    layout: Layout,
    seed: &ModelParams,
    stage: Stage,
    flags: Vec<String>,
) -> Result<FitReport> {
    let problem = SpectrumResidual::new(table, layout, config.weight_mode);
    let settings = LmSettings {
        max_iterations: config.max_iterations,
        relative_tolerance: config.relative_tolerance,
        finite_difference: config.finite_difference_jacobian,
    };
    let out = minimize(&problem, layout.pack(seed), settings)?;
    let params = layout.unpack(&out.params)?;
    finish(table, params, out.cost_history, out.iterations, out.accepted, out.termination, stage, flags)
}

fn fixed_modes(table: &Spectrum, config: &FitConfig) -> Result<usize> {
    match config.n_modes {
        ModeCount::Fixed(n) => Ok(n),
        ModeCount::Auto => Ok(detect_peaks(table, config.peak_prominence).len().max(1)),
    }
}

/// Stage 1: peaks → Lorentzian initial guess → fit over {ω_ii, ln κ_i, ln g_i}.
pub fn fit_noninteracting(table: &Spectrum, config: &FitConfig) -> Result<FitReport> {
    config.validate()?;
    validate_table(table)?;
    let n = fixed_modes(table, config)?;
    if table.max_j() <= 0.0 {
        return degenerate_report(table, n, Stage::NonInteracting);
    }
    let peaks = detect_peaks(table, config.peak_prominence);
    let (seed, flags) = init_noninteracting(&peaks, table, n);
    run(table, config, Layout::NonInteracting(n), &seed, Stage::NonInteracting, flags)
}

/// Stage 2: refine over the full upper triangle of ω plus ln κ, ln g.
pub fn fit_interacting(table: &Spectrum, config: &FitConfig, seed: &ModelParams) -> Result<FitReport> {
    config.validate()?;
    validate_table(table)?;
    let n = seed.n_modes();
    if table.max_j() <= 0.0 {
        return degenerate_report(table, n, Stage::Interacting);
    }
    run(table, config, Layout::Interacting(n), seed, Stage::Interacting, Vec::new())
}

fn better(a: &FitReport, b: &FitReport) -> bool {
    a.relative_l2_error < b.relative_l2_error
}

/// Modes contributing (nearly) nothing: peak height below 10⁻⁴·max J, a
/// width exceeding the grid span or one narrower than the grid spacing.
fn dead_modes(params: &ModelParams, table: &Spectrum) -> Vec<usize> {
    let x = table.omega();
    let span = x[x.len() - 1] - x[0];
    let step = span / (x.len() - 1) as f64;
    let floor = 1e-4 * table.max_j();
    (0..params.n_modes())
        .filter(|&i| {
            let (k, g) = (params.kappa()[i], params.g()[i]);
            k > span || k < step || 2.0 * g * g / (std::f64::consts::PI * k) < floor
        })
        .collect()
}

/// Moves dead modes to the largest remaining deficit of the fit, decoupled
/// from the other modes, with the median width of the live modes.
/// With an `rng`, the position is drawn with probability ∝ deficit² and the
/// width is jittered by up to a factor of two.
fn reseed_dead(
    params: &ModelParams,
    table: &Spectrum,
    dead: &[usize],
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<ModelParams> {
    let n = params.n_modes();
    let fit = evaluate_jmod(params, table.omega())?;
    let mut deficit: Vec<f64> = table.j().iter().zip(&fit).map(|(d, f)| d - f).collect();
    let live: Vec<f64> = (0..n).filter(|i| !dead.contains(i)).map(|i| params.kappa()[i]).collect();
    let x = table.omega();
    let step = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
    let k_base = if live.is_empty() { 10.0 * step } else { median(&live) };
    let mut omega = params.omega().clone();
    let mut kappa = params.kappa().to_vec();
    let mut g = params.g().to_vec();
    for &i in dead {
        let (mut at, mut h) =
            deficit.iter().enumerate().fold((0, f64::NEG_INFINITY), |b, (k, &v)| if v > b.1 { (k, v) } else { b });
        let mut k_new = k_base;
        if let Some(rng) = rng.as_deref_mut() {
            let total: f64 = deficit.iter().map(|d| d * d).sum();
            let mut u = rng.gen_range(0.0..1.0) * total;
            for (k, d) in deficit.iter().enumerate() {
                u -= d * d;
                if u <= 0.0 {
                    at = k;
                    h = d.abs();
                    break;
                }
            }
            k_new = k_base * 2f64.powf(rng.gen_range(-1.0..1.0));
        }
        let h = h.max(1e-3 * table.max_j());
        for j in 0..n {
            if j != i {
                omega[(i, j)] = 0.0;
                omega[(j, i)] = 0.0;
            }
        }
        omega[(i, i)] = x[at];
        kappa[i] = k_new;
        g[i] = (h * std::f64::consts::PI * k_new / 2.0).sqrt();
        // claim this deficit so the next dead mode goes elsewhere
        for (k, d) in deficit.iter_mut().enumerate() {
            let u = (x[k] - x[at]) / (0.5 * k_new);
            *d -= h / (1.0 + u * u);
        }
    }
    ModelParams::new(omega, kappa, g)
}

/// Both stages for a fixed N. When the target error is missed, the
/// interacting stage is restarted: dead modes are re-seeded at the largest
/// deficit, otherwise the off-diagonal couplings are randomized.
pub fn fit_two_stage(table: &Spectrum, config: &FitConfig) -> Result<FitReport> {
    let mut stage1 = fit_noninteracting(table, config)?;
    if stage1.termination == Termination::Degenerate {
        return Ok(FitReport { stage: Stage::Interacting, ..stage1 });
    }
    let dead = dead_modes(&stage1.params, table);
    if !dead.is_empty() {
        let seed = reseed_dead(&stage1.params, table, &dead, None)?;
        let retry = run(
            table,
            config,
            Layout::NonInteracting(seed.n_modes()),
            &seed,
            Stage::NonInteracting,
            stage1.flags.clone(),
        )?;
        if better(&retry, &stage1) {
            stage1 = retry;
        }
    }
    let stage1_flags: Vec<String> = stage1.flags.iter().map(|f| format!("stage1: {f}")).collect();
    let mut best = fit_interacting(table, config, &stage1.params)?;
    log::debug!("interacting stage: error {:.3e} after {} iterations", best.relative_l2_error, best.iterations_used);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = stage1.params.n_modes();
    let kscale = median(stage1.params.kappa());
    for attempt in 0..config.restarts {
        if best.relative_l2_error < config.target_error {
            break;
        }
        let dead = dead_modes(&best.params, table);
        let seed = if !dead.is_empty() && attempt % 2 == 0 {
            let r = if attempt == 0 { None } else { Some(&mut rng) };
            reseed_dead(&best.params, table, &dead, r)?
        } else if n >= 2 {
            let mut omega = stage1.params.omega().clone();
            let amp = kscale * (0.25 + 0.25 * attempt as f64);
            for i in 0..n {
                for j in i + 1..n {
                    let v = rng.gen_range(-amp..=amp);
                    omega[(i, j)] = v;
                    omega[(j, i)] = v;
                }
            }
            let perturbed = ModelParams::new(omega, stage1.params.kappa().to_vec(), stage1.params.g().to_vec())?;
            let dead1 = dead_modes(&perturbed, table);
            if dead1.is_empty() {
                perturbed
            } else {
                reseed_dead(&perturbed, table, &dead1, Some(&mut rng))?
            }
        } else {
            break;
        };
        let mut trial = fit_interacting(table, config, &seed)?;
        log::debug!(
            "restart {}: dead {:?}, error {:.3e} after {} iterations",
            attempt + 1,
            dead,
            trial.relative_l2_error,
            trial.iterations_used
        );
        if better(&trial, &best) {
            trial.flags.push(format!("restart {}", attempt + 1));
            best = trial;
        }
    }
    best.flags.extend(stage1_flags);
    Ok(best)
}

/// Fits with increasing N (from the number of detected peaks) until the
/// target error is met, the error stops improving, or the mode ceiling is hit.
pub fn fit_auto(table: &Spectrum, config: &FitConfig) -> Result<FitReport> {
    config.validate()?;
    validate_table(table)?;
    let start = detect_peaks(table, config.peak_prominence).len().max(1).min(config.max_modes);
    let mut best: Option<FitReport> = None;
    let mut stale = 0;
    for n in start..=config.max_modes {
        let cfg = FitConfig { n_modes: ModeCount::Fixed(n), ..config.clone() };
        let report = fit_two_stage(table, &cfg)?;
        log::info!("auto fit: N = {n}, relative L2 error {:.3e}", report.relative_l2_error);
        let done = report.relative_l2_error < config.target_error || report.termination == Termination::Degenerate;
        match &best {
            // strict improvement required, so equal errors keep the smaller N
            Some(b) if !(report.relative_l2_error < 0.9 * b.relative_l2_error) => {
                stale += 1;
                if report.relative_l2_error < b.relative_l2_error {
                    best = Some(report);
                }
            }
            _ => {
                stale = 0;
                best = Some(report);
            }
        }
        if done {
            break;
        }
        if stale >= 2 {
            let b = best.as_mut().expect("at least one fit");
            b.flags.push("auto: error floor reached".into());
            return Ok(best.unwrap());
        }
        if n == config.max_modes {
            let b = best.as_mut().expect("at least one fit");
            b.flags.push("auto: mode ceiling reached".into());
        }
    }
    Ok(best.expect("at least one fit"))
}

/// Dispatches on `config.n_modes`.
pub fn fit(table: &Spectrum, config: &FitConfig) -> Result<FitReport> {
    match config.n_modes {
        ModeCount::Auto => fit_auto(table, config),
        ModeCount::Fixed(_) => fit_two_stage(table, config),
    }
}

pub(crate) fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = s.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}
