//! End-to-end run: fit a tabulated spectral density, then compare the
//! emitter dynamics of the fitted model against the exact continuum solution
//! on the original table.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{solve_fewmode_single_excitation_with, solve_ww_exact_with, EmitterSpec};
use crate::error::Result;
use crate::fitting::{fit, fit_noninteracting, FitConfig, FitReport};
use crate::io::{ingest_spectrum_with, trajectory_table, write_json, write_spectrum, write_table};
use crate::spectral::jmod_table;
use crate::tolerances::Tolerances;
use crate::Spectrum;

/// How far the fit goes before the dynamics comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineStage {
    /// Independent Lorentzian modes only.
    NonInteracting,
    /// Both stages (interacting modes).
    #[default]
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub out_dir: PathBuf,
    pub fit: FitConfig,
    pub stage: PipelineStage,
    pub omega_eg: f64,
    pub t_max_fs: f64,
    pub dt_fs: f64,
    pub tolerances: Tolerances,
}

impl PipelineConfig {
    pub fn new(out_dir: impl Into<PathBuf>, omega_eg: f64) -> Self {
        Self {
            out_dir: out_dir.into(),
            fit: FitConfig::default(),
            stage: PipelineStage::Full,
            omega_eg,
            t_max_fs: 500.0,
            dt_fs: 0.1,
            tolerances: Tolerances::default(),
        }
    }
}

/// Machine-readable summary written as `comparison.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub stage: PipelineStage,
    pub n_modes: usize,
    pub omega_eg: f64,
    pub t_max_fs: f64,
    pub dt_fs: f64,
    /// max_t | |c_e|²_model − |c_e|²_exact |
    pub max_population_deviation: f64,
    pub rms_population_deviation: f64,
    pub fit_relative_l2_error: f64,
    pub fit_converged: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub report: FitReport,
    pub comparison: Comparison,
    pub artifacts: Vec<PathBuf>,
}

pub const ARTIFACTS: [&str; 6] =
    ["params.json", "report.json", "jmod.csv", "traj_exact.csv", "traj_model.csv", "comparison.json"];

pub fn pipeline_fit_and_verify(spectrum_path: &Path, config: &PipelineConfig) -> Result<PipelineOutcome> {
    let ingested = ingest_spectrum_with(spectrum_path, &config.tolerances).map_err(|e| e.in_stage("ingest"))?;
    run_pipeline(&ingested.value, ingested.warnings, config)
}

/// Same as [`pipeline_fit_and_verify`] on an in-memory table. All numerical
/// stages finish before anything is written.
pub fn run_pipeline(table: &Spectrum, mut warnings: Vec<String>, config: &PipelineConfig) -> Result<PipelineOutcome> {
    let emitter = EmitterSpec::excited(config.omega_eg);
    emitter.validate().map_err(|e| e.in_stage("config"))?;
    config.fit.validate().map_err(|e| e.in_stage("config"))?;

    let report = match config.stage {
        PipelineStage::Full => fit(table, &config.fit),
        PipelineStage::NonInteracting => fit_noninteracting(table, &config.fit),
    }
    .map_err(|e| e.in_stage("fit"))?;
    let jmod = jmod_table(&report.params, table.omega()).map_err(|e| e.in_stage("evaluate"))?;

    let tol = &config.tolerances;
    let exact = solve_ww_exact_with(table, &emitter, config.t_max_fs, config.dt_fs, tol)
        .map_err(|e| e.in_stage("exact dynamics"))?;
    let model = solve_fewmode_single_excitation_with(&report.params, &emitter, config.t_max_fs, config.dt_fs, tol)
        .map_err(|e| e.in_stage("model dynamics"))?;
    warnings.extend(exact.warnings.iter().cloned());

    let pe = exact.emitter_population();
    let pm = model.emitter_population();
    let diffs: Vec<f64> = pe.iter().zip(&pm).map(|(a, b)| (a - b).abs()).collect();
    let max_dev = diffs.iter().cloned().fold(0.0, f64::max);
    let rms = (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt();
    let comparison = Comparison {
        stage: config.stage,
        n_modes: report.params.n_modes(),
        omega_eg: config.omega_eg,
        t_max_fs: config.t_max_fs,
        dt_fs: config.dt_fs,
        max_population_deviation: max_dev,
        rms_population_deviation: rms,
        fit_relative_l2_error: report.relative_l2_error,
        fit_converged: report.converged,
        warnings,
    };

    let exact_rows = trajectory_table(&exact, None).map_err(|e| e.in_stage("output"))?;
    let model_rows = trajectory_table(&model, None).map_err(|e| e.in_stage("output"))?;
    let dir = &config.out_dir;
    let paths: Vec<PathBuf> = ARTIFACTS.iter().map(|name| dir.join(name)).collect();
    let write = || -> Result<()> {
        write_json(&paths[0], &report.params)?;
        write_json(&paths[1], &report)?;
        write_spectrum(&paths[2], &jmod)?;
        write_table(&paths[3], &exact_rows)?;
        write_table(&paths[4], &model_rows)?;
        write_json(&paths[5], &comparison)
    };
    write().map_err(|e| e.in_stage("output"))?;
    log::info!(
        "pipeline: N = {}, fit error {:.3e}, max population deviation {:.3e}",
        comparison.n_modes,
        comparison.fit_relative_l2_error,
        comparison.max_population_deviation
    );
    Ok(PipelineOutcome { report, comparison, artifacts: paths })
}
