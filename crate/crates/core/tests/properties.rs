use fewmode::dynamics::{solve_fewmode_single_excitation, tilde_transform, EmitterSpec};
use fewmode::field::{compute_kernel, field_intensity_with, CorrelationTable, GreensFunctionTable, IntensityPath};
use fewmode::io::{ingest_spectrum, write_spectrum};
use fewmode::linalg::Mat;
use fewmode::spectral::{evaluate_jmod, evaluate_lorentzian_sum, jmod_table, linspace};
use fewmode::{ModelParams, Spectrum, C64};
use proptest::prelude::*;

/// Arbitrary valid parameters, including strong off-diagonal mixing.
fn params(max_n: usize) -> impl Strategy<Value = ModelParams> {
    (1..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec(0.5f64..2.5, n),
            prop::collection::vec(-0.3f64..0.3, n * (n - 1) / 2),
            prop::collection::vec(1e-3f64..0.5, n),
            prop::collection::vec(0.0f64..0.2, n),
        )
            .prop_map(move |(diag, off, kappa, g)| {
                let mut omega = Mat::zeros(n, n);
                let mut k = 0;
                for i in 0..n {
                    omega[(i, i)] = diag[i];
                    for j in i + 1..n {
                        omega[(i, j)] = off[k];
                        omega[(j, i)] = off[k];
                        k += 1;
                    }
                }
                ModelParams::new(omega, kappa, g).unwrap()
            })
    })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jmod_is_non_negative(p in params(6)) {
        let j = evaluate_jmod(&p, &linspace(0.0, 3.5, 2001)).unwrap();
        let peak = max_abs(&j);
        prop_assert!(j.iter().all(|&v| v >= -1e-12 * peak));
    }

    #[test]
    fn jmod_is_invariant_under_mode_relabeling(p in params(5), seed in any::<u64>()) {
        let n = p.n_modes();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let grid = linspace(0.2, 3.0, 501);
        let a = evaluate_jmod(&p, &grid).unwrap();
        let b = evaluate_jmod(&p.permuted(&perm), &grid).unwrap();
        let peak = max_abs(&a).max(f64::MIN_POSITIVE);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10 * peak);
        }
    }

    #[test]
    fn diagonal_models_are_lorentzian_sums(p in params(5)) {
        let d = ModelParams::diagonal(&p.mode_energies(), p.kappa().to_vec(), p.g().to_vec()).unwrap();
        let grid = linspace(0.0, 3.0, 1001);
        let a = evaluate_jmod(&d, &grid).unwrap();
        let b = evaluate_lorentzian_sum(&d, &grid).unwrap();
        let peak = max_abs(&b).max(f64::MIN_POSITIVE);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * peak);
        }
    }

    #[test]
    fn tilde_basis_is_orthogonal(p in params(6)) {
        let basis = tilde_transform(&p);
        let v = basis.transform_matrix();
        let n = p.n_modes();
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| v[(i, k)] * v[(j, k)]).sum();
                let delta = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - delta).abs() < 1e-12);
            }
        }
        let back = basis.reconstruct();
        let scale = max_abs(p.omega().as_slice());
        for i in 0..n {
            for j in 0..n {
                prop_assert!((back[(i, j)] - p.omega()[(i, j)]).abs() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn spectrum_csv_round_trips_exactly(p in params(4), points in 5usize..400) {
        let table = jmod_table(&p, &linspace(0.3, 2.7, points)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("j.csv");
        write_spectrum(&path, &table).unwrap();
        let back: Spectrum = ingest_spectrum(&path).unwrap().value;
        prop_assert_eq!(back, table);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn total_population_never_grows(p in params(4), w_eg in 0.8f64..2.0) {
        let traj = solve_fewmode_single_excitation(&p, &EmitterSpec::excited(w_eg), 60.0, 0.2).unwrap();
        let norm = traj.norm();
        prop_assert!((norm[0] - 1.0).abs() < 1e-12);
        for w in norm.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-10);
        }
    }

    #[test]
    fn intensity_is_non_negative_for_any_pure_emission(
        re in prop::collection::vec(-1.0f64..1.0, 40),
        im in prop::collection::vec(-1.0f64..1.0, 40),
        w0 in 1.0f64..1.6,
        width in 0.02f64..0.3,
    ) {
        let om = linspace(0.5, 2.2, 341);
        let g = om.iter().map(|&w| {
            let l = 1.0 / ((w - w0).powi(2) + width * width);
            [l, -0.5 * l, 0.2 * l * (w - w0)]
        }).collect();
        let gt = GreensFunctionTable::new(vec!["p".into()], vec![[0.0; 3]], om, vec![g]).unwrap();
        let kernels = compute_kernel(&gt, 3.9, 0.1).unwrap();
        let f: Vec<C64> = re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect();
        let corr = CorrelationTable::rank1(kernels.tau.clone(), f).unwrap();
        let fast = field_intensity_with(&kernels, &corr, IntensityPath::Auto).unwrap();
        let slow = field_intensity_with(&kernels, &corr.to_dense(), IntensityPath::Generic).unwrap();
        let peak = max_abs(&slow.intensity[0]);
        for (a, b) in fast.intensity[0].iter().zip(&slow.intensity[0]) {
            prop_assert!(*a >= 0.0);
            prop_assert!(*b >= -1e-12 * peak);
            prop_assert!((a - b).abs() <= 1e-9 * peak);
        }
    }
}
