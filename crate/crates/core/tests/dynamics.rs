#![allow(clippy::needless_range_loop)]

use fewmode::dynamics::{solve_fewmode_single_excitation, solve_lindblad_dense, solve_ww_exact, Coupling, EmitterSpec};
use fewmode::spectral::{evaluate_lorentzian_sum, jmod_table, linspace};
use fewmode::synthetic::RandomModel;
use fewmode::units::HBAR_EV_FS;
use fewmode::{ModelParams, Spectrum, C64};

/// Resonant emitter + one lossy mode, closed form:
/// c_e = e^{−κt/4} [cos Ωt + κ/(4Ω) sin Ωt], Ω = √(g² − κ²/16).
fn rabi_oracle(g: f64, kappa: f64, t_fs: f64) -> C64 {
    let t = t_fs / HBAR_EV_FS;
    let om = C64::new(g * g - kappa * kappa / 16.0, 0.0).sqrt();
    let (s, c) = ((om * t).sin(), (om * t).cos());
    let ratio = if om.norm() < 1e-300 { C64::new(t, 0.0) } else { s / om };
    (c + ratio * (kappa / 4.0)) * (-kappa * t / 4.0).exp()
}

fn lorentzian_table(w0: f64, kappa: f64, g: f64, lo: f64, hi: f64, n: usize) -> Spectrum {
    let om = linspace(lo, hi, n);
    let p = ModelParams::diagonal(&[w0], vec![kappa], vec![g]).unwrap();
    let j = evaluate_lorentzian_sum(&p, &om).unwrap();
    Spectrum::new(om, j).unwrap()
}

#[test]
fn fewmode_matches_dissipative_rabi() {
    for &(g, kappa) in &[(0.05, 0.02), (0.01, 0.1), (0.02, 0.08)] {
        let w = 1.145;
        let p = ModelParams::diagonal(&[w], vec![kappa], vec![g]).unwrap();
        let traj = solve_fewmode_single_excitation(&p, &EmitterSpec::excited(w), 300.0, 0.5).unwrap();
        for (t, c) in traj.times.iter().zip(&traj.c_e) {
            let exact = rabi_oracle(g, kappa, *t);
            assert!((c - exact).norm() < 1e-8, "g = {g}, kappa = {kappa}, t = {t}: {c} vs {exact}");
        }
    }
}

#[test]
fn continuum_matches_dissipative_rabi_strong_coupling() {
    let (w, g, kappa) = (1.145, 0.05, 0.02);
    let table = lorentzian_table(w, kappa, g, 0.05, 2.3, 4501);
    let traj = solve_ww_exact(&table, &EmitterSpec::excited(w), 200.0, 0.1).unwrap();
    let mut worst: f64 = 0.0;
    for (t, c) in traj.times.iter().zip(&traj.c_e) {
        worst = worst.max((c.norm_sqr() - rabi_oracle(g, kappa, *t).norm_sqr()).abs());
    }
    assert!(worst < 1e-3, "max population error {worst:.3e}");
}

#[test]
fn continuum_markov_limit() {
    let (w, g, kappa) = (1.145, 0.005, 0.2);
    let table = lorentzian_table(w, kappa, g, 0.1, 2.2, 4201);
    let gamma = 4.0 * g * g / kappa; // 2πJ(ω_eg)
    let lifetime_fs = HBAR_EV_FS / gamma;
    let traj = solve_ww_exact(&table, &EmitterSpec::excited(w), 3.0 * lifetime_fs, 0.25).unwrap();
    for (t, c) in traj.times.iter().zip(&traj.c_e).skip(1) {
        let markov = (-gamma * t / HBAR_EV_FS).exp();
        let rel = (c.norm_sqr() - markov).abs() / markov;
        assert!(rel < 0.02, "t = {t}: {} vs {markov}", c.norm_sqr());
    }
}

#[test]
fn short_time_universality() {
    let p = RandomModel::default().sample_seeded(5, 3);
    let grid = linspace(0.2, 2.6, 6001);
    let table = jmod_table(&p, &grid).unwrap();
    let area = table.integral();
    let emitter = EmitterSpec::excited(1.3);
    let exact = solve_ww_exact(&table, &emitter, 1.0, 0.01).unwrap();
    let model = solve_fewmode_single_excitation(&p, &emitter, 1.0, 0.01).unwrap();
    let g2: f64 = p.g().iter().map(|g| g * g).sum();
    let mut prev_dev = (f64::INFINITY, f64::INFINITY);
    for k in [100usize, 50, 20, 10] {
        let t = exact.times[k] / HBAR_EV_FS;
        let dev = ((1.0 - exact.c_e[k].norm_sqr()) / (area * t * t) - 1.0).abs();
        // the model's density has Lorentzian tails beyond the table, total area Σg²
        let dev_model = ((1.0 - model.c_e[k].norm_sqr()) / (g2 * t * t) - 1.0).abs();
        assert!(dev < prev_dev.0 && dev_model < prev_dev.1, "t = {} fs", exact.times[k]);
        prev_dev = (dev, dev_model);
    }
    assert!(prev_dev.0 < 1e-2 && prev_dev.1 < 1e-2, "{prev_dev:?}");
}

#[test]
fn frame_invariance() {
    let p = RandomModel::default().sample_seeded(11, 3);
    let delta = 0.37;
    let a = solve_fewmode_single_excitation(&p, &EmitterSpec::excited(1.25), 200.0, 0.5).unwrap();
    let b =
        solve_fewmode_single_excitation(&p.shifted(delta), &EmitterSpec::excited(1.25 + delta), 200.0, 0.5).unwrap();
    for (x, y) in a.emitter_population().iter().zip(b.emitter_population()) {
        assert!((x - y).abs() < 1e-9);
    }

    let grid = linspace(0.3, 2.5, 3001);
    let ta = jmod_table(&p, &grid).unwrap();
    let shifted: Vec<f64> = grid.iter().map(|w| w + delta).collect();
    let tb = Spectrum::new(shifted, ta.j().to_vec()).unwrap();
    let ea = solve_ww_exact(&ta, &EmitterSpec::excited(1.25), 100.0, 0.2).unwrap();
    let eb = solve_ww_exact(&tb, &EmitterSpec::excited(1.25 + delta), 100.0, 0.2).unwrap();
    for (x, y) in ea.emitter_population().iter().zip(eb.emitter_population()) {
        assert!((x - y).abs() < 1e-9);
    }
}

#[test]
fn fewmode_matches_dense_master_equation_in_rwa() {
    for (seed, n) in [(21u64, 1usize), (22, 2), (23, 3)] {
        let p = RandomModel::default().sample_seeded(seed, n);
        let emitter = EmitterSpec::excited(1.3);
        let amp = solve_fewmode_single_excitation(&p, &emitter, 150.0, 1.0).unwrap();
        let dense = solve_lindblad_dense(&p, &emitter, 1, 150.0, 1.0, Coupling::RotatingWave).unwrap();
        let mode_pops = amp.mode_populations().unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..amp.times.len() {
            worst = worst.max((amp.c_e[k].norm_sqr() - dense.emitter_population[k]).abs());
            for i in 0..n {
                worst = worst.max((mode_pops[k][i] - dense.mode_populations[k][i]).abs());
            }
        }
        assert!(worst < 1e-6, "N = {n}: {worst:.3e}");
        assert!(dense.max_trace_error < 1e-9);
    }
}

#[test]
fn full_coupling_approaches_rwa_for_weak_coupling() {
    let w = 1.145;
    let mut diffs = Vec::new();
    for g in [0.02, 0.01, 0.005] {
        let p = ModelParams::diagonal(&[w], vec![0.02], vec![g]).unwrap();
        let emitter = EmitterSpec::excited(w);
        let amp = solve_fewmode_single_excitation(&p, &emitter, 100.0, 0.5).unwrap();
        let full = solve_lindblad_dense(&p, &emitter, 2, 100.0, 0.5, Coupling::Full).unwrap();
        let d = amp
            .emitter_population()
            .iter()
            .zip(&full.emitter_population)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(full.max_trace_error < 1e-9);
        diffs.push(d);
    }
    assert!(diffs[2] < 1e-4, "{diffs:?}");
    assert!(diffs[1] < diffs[0] && diffs[2] < diffs[1], "{diffs:?}");
}

#[test]
fn model_and_continuum_agree() {
    let p = RandomModel::default().sample_seeded(31, 2);
    let grid = linspace(0.05, 2.8, 12001);
    let table = jmod_table(&p, &grid).unwrap();
    let emitter = EmitterSpec::excited(1.3);
    let exact = solve_ww_exact(&table, &emitter, 300.0, 0.1).unwrap();
    let model = solve_fewmode_single_excitation(&p, &emitter, 300.0, 0.1).unwrap();
    let worst = exact
        .emitter_population()
        .iter()
        .zip(model.emitter_population())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-3, "{worst:.3e}");
}
