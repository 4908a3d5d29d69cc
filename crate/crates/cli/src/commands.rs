use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fewmode::dynamics::{
    solve_fewmode_single_excitation_with, solve_lindblad_dense_with, solve_ww_exact_with, tilde_transform, Coupling,
    EmitterSpec,
};
use fewmode::field::{compute_kernel_with, emitter_correlation, field_intensity, intensity_map};
use fewmode::fitting::{fit, fit_noninteracting, FitConfig, FitReport, ModeCount, WeightMode};
use fewmode::io::{
    ingest_spectrum_with, intensity_table, lindblad_table, map_table, read_greens, read_json, trajectory_table,
    write_json, write_spectrum, write_table, DataTable,
};
use fewmode::pipeline::{pipeline_fit_and_verify, run_pipeline, PipelineConfig, PipelineStage};
use fewmode::spectral::{compute_poles_with, evaluate_jmod_with, linspace, purcell_factor, EvalMethod};
use fewmode::synthetic::demo_spectrum;
use fewmode::{ModelParams, Spectrum, Tolerances};

use crate::args::*;
use crate::Outcome;

pub fn run(cli: &Cli) -> Result<Outcome> {
    let tol = match cli.tol_profile {
        TolProfile::Default => Tolerances::default(),
        TolProfile::Strict => Tolerances::strict(),
    };
    match &cli.command {
        Command::Fit(a) => cmd_fit(a, &tol),
        Command::Eval(a) => cmd_eval(a, &tol),
        Command::Poles(a) => cmd_poles(a, &tol),
        Command::Dynamics(a) => cmd_dynamics(a, &tol),
        Command::Field(a) => cmd_field(a, &tol),
        Command::Pipeline(a) => cmd_pipeline(a, &tol),
    }
}

fn fit_config(o: &FitOptions) -> Result<FitConfig> {
    let cfg = FitConfig {
        n_modes: match o.n_modes {
            Modes::Auto => ModeCount::Auto,
            Modes::Fixed(n) => ModeCount::Fixed(n),
        },
        max_iterations: o.max_iter,
        weight_mode: match o.weight {
            WeightArg::Uniform => WeightMode::Uniform,
            WeightArg::Relative => WeightMode::Relative,
            WeightArg::Log => WeightMode::Log,
        },
        seed: o.seed,
        restarts: o.restarts,
        target_error: o.target_error,
        finite_difference_jacobian: o.fd_jacobian,
        max_modes: o.max_modes,
        ..FitConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn check_time(t: &TimeArgs) -> Result<EmitterSpec> {
    if !(t.omega_eg > 0.0 && t.omega_eg.is_finite()) {
        bail!("--omega-eg must be > 0, got {}", t.omega_eg);
    }
    if !(t.tmax > 0.0 && t.tmax.is_finite()) || !(t.dt > 0.0 && t.dt <= t.tmax) {
        bail!("need 0 < --dt <= --tmax, got dt = {}, tmax = {}", t.dt, t.tmax);
    }
    Ok(EmitterSpec::excited(t.omega_eg))
}

fn load_spectrum(path: &Path, tol: &Tolerances) -> Result<Spectrum> {
    let ingested = ingest_spectrum_with(path, tol)?;
    for w in &ingested.warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(ingested.value)
}

fn load_params(path: &Path) -> Result<ModelParams> {
    read_json(path).with_context(|| format!("reading parameters from {}", path.display()))
}

fn convergence(report: &FitReport) -> Outcome {
    if report.converged {
        Outcome::Done
    } else {
        Outcome::NotConverged(format!(
            "fit did not converge ({:?} after {} iterations, relative L2 error {:.3e})",
            report.termination, report.iterations_used, report.relative_l2_error
        ))
    }
}

fn cmd_fit(a: &FitArgs, tol: &Tolerances) -> Result<Outcome> {
    let cfg = fit_config(&a.fit)?;
    let table = match &a.spectrum {
        Some(p) => load_spectrum(p, tol)?,
        None => demo_spectrum().1,
    };
    let report = match a.fit.stage {
        StageArg::Full => fit(&table, &cfg)?,
        StageArg::NonInteracting => fit_noninteracting(&table, &cfg)?,
    };
    write_json(&a.out, &report.params)?;
    if let Some(r) = &a.report {
        write_json(r, &report)?;
    }
    println!(
        "N = {}, relative L2 error {:.3e}, max pointwise error {:.3e}, {} iterations ({:?})",
        report.params.n_modes(),
        report.relative_l2_error,
        report.max_pointwise_error,
        report.iterations_used,
        report.termination
    );
    for f in &report.flags {
        eprintln!("note: {f}");
    }
    Ok(convergence(&report))
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!("--grid expects LO:HI:POINTS, got '{spec}'");
    }
    let lo: f64 = parts[0].parse().context("grid lower bound")?;
    let hi: f64 = parts[1].parse().context("grid upper bound")?;
    let n: usize = parts[2].parse().context("grid point count")?;
    if !(lo > 0.0 && hi > lo) || n < 2 {
        bail!("--grid needs 0 < LO < HI and at least 2 points");
    }
    Ok(linspace(lo, hi, n))
}

fn cmd_eval(a: &EvalArgs, tol: &Tolerances) -> Result<Outcome> {
    if let Some(mu) = a.purcell_mu {
        if !(mu > 0.0 && mu.is_finite()) {
            bail!("--purcell-mu must be > 0");
        }
    }
    let params = load_params(&a.params)?;
    let grid = match (&a.spectrum, &a.grid) {
        (Some(p), _) => load_spectrum(p, tol)?.omega().to_vec(),
        (None, Some(g)) => parse_grid(g)?,
        (None, None) => fewmode::spectral::resonance_grid(&params, 10.0, 4001),
    };
    let method = match a.method {
        MethodArg::Auto => EvalMethod::Auto,
        MethodArg::Resolvent => EvalMethod::Resolvent,
        MethodArg::Poles => EvalMethod::PoleSum,
    };
    let j = evaluate_jmod_with(&params, &grid, method, tol)?;
    let table = Spectrum::new(grid, j)?;
    match a.purcell_mu {
        None => write_spectrum(&a.out, &table)?,
        Some(mu) => {
            let p = purcell_factor(&table, mu)?;
            let rows = (0..table.len()).map(|k| vec![table.omega()[k], table.j()[k], p[k]]).collect();
            let columns = vec!["omega_eV".into(), "J_eV".into(), "purcell".into()];
            write_table(&a.out, &DataTable { columns, rows })?;
        }
    }
    Ok(Outcome::Done)
}

fn cmd_poles(a: &PolesArgs, tol: &Tolerances) -> Result<Outcome> {
    let params = load_params(&a.params)?;
    let poles = compute_poles_with(&params, tol)?;
    match &a.out {
        Some(p) => write_json(p, &poles)?,
        None => println!("{}", serde_json::to_string_pretty(&poles)?),
    }
    Ok(Outcome::Done)
}

fn cmd_dynamics(a: &DynamicsArgs, tol: &Tolerances) -> Result<Outcome> {
    let emitter = check_time(&a.time)?;
    let (t_max, dt) = (a.time.tmax, a.time.dt);
    if a.exact {
        let table = match &a.spectrum {
            Some(p) => load_spectrum(p, tol)?,
            None if a.demo => demo_spectrum().1,
            None => bail!("--exact needs --spectrum or --demo"),
        };
        let traj = solve_ww_exact_with(&table, &emitter, t_max, dt, tol)?;
        for w in &traj.warnings {
            eprintln!("warning: {w}");
        }
        write_table(&a.out, &trajectory_table(&traj, None)?)?;
        return Ok(Outcome::Done);
    }
    let params = match &a.params {
        Some(p) => load_params(p)?,
        None if a.demo => demo_spectrum().0,
        None => bail!("--spectrum requires --exact"),
    };
    if let Some(cutoff) = a.lindblad_cutoff {
        let coupling = match a.coupling {
            CouplingArg::Full => Coupling::Full,
            CouplingArg::Rwa => Coupling::RotatingWave,
        };
        let traces = solve_lindblad_dense_with(&params, &emitter, cutoff, t_max, dt, coupling, tol)?;
        write_table(&a.out, &lindblad_table(&traces))?;
        return Ok(Outcome::Done);
    }
    let traj = solve_fewmode_single_excitation_with(&params, &emitter, t_max, dt, tol)?;
    let basis = a.tilde.then(|| tilde_transform(&params));
    write_table(&a.out, &trajectory_table(&traj, basis.as_ref())?)?;
    Ok(Outcome::Done)
}

fn map_path(out: &Path, t: f64) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("intensity");
    out.with_file_name(format!("{stem}_t{t}fs.csv"))
}

fn cmd_field(a: &FieldArgs, tol: &Tolerances) -> Result<Outcome> {
    let emitter = check_time(&a.time)?;
    if !(a.mu > 0.0 && a.mu.is_finite()) {
        bail!("--mu must be > 0");
    }
    if a.map && a.times.iter().any(|&t| !(0.0..=a.time.tmax).contains(&t)) {
        bail!("--times must lie within [0, --tmax]");
    }
    let params = load_params(&a.params)?;
    let mut green = read_greens(&a.green)?;
    if a.points != "all" {
        let ids: Vec<&str> = a.points.split(',').map(str::trim).collect();
        green = green.select(&ids)?;
    }
    let kernels = compute_kernel_with(&green, a.time.tmax, a.time.dt, tol)?;
    for w in &kernels.warnings {
        eprintln!("warning: {w}");
    }
    let corr = emitter_correlation(&params, &emitter, a.time.tmax, a.time.dt, tol)?.scaled(a.mu * a.mu)?;
    if a.map {
        let map = intensity_map(&kernels, &corr, &a.times, a.normalize)?;
        for (k, &t) in map.times.iter().enumerate() {
            write_table(&map_path(&a.out, t), &map_table(&map, k))?;
        }
    } else {
        let mut traces = field_intensity(&kernels, &corr)?;
        if a.normalize {
            traces = traces.normalized();
        }
        write_table(&a.out, &intensity_table(&traces))?;
    }
    Ok(Outcome::Done)
}

fn cmd_pipeline(a: &PipelineArgs, tol: &Tolerances) -> Result<Outcome> {
    check_time(&a.time)?;
    let mut cfg = PipelineConfig::new(&a.out_dir, a.time.omega_eg);
    cfg.fit = fit_config(&a.fit)?;
    cfg.stage = match a.fit.stage {
        StageArg::Full => PipelineStage::Full,
        StageArg::NonInteracting => PipelineStage::NonInteracting,
    };
    cfg.t_max_fs = a.time.tmax;
    cfg.dt_fs = a.time.dt;
    cfg.tolerances = *tol;
    let outcome = match &a.spectrum {
        Some(p) => pipeline_fit_and_verify(p, &cfg)?,
        None => run_pipeline(&demo_spectrum().1, Vec::new(), &cfg)?,
    };
    let c = &outcome.comparison;
    for w in &c.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "N = {}, fit error {:.3e}, max |population deviation| {:.3e}; artifacts in {}",
        c.n_modes,
        c.fit_relative_l2_error,
        c.max_population_deviation,
        a.out_dir.display()
    );
    Ok(convergence(&outcome.report))
}
