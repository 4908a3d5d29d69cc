use std::path::Path;
use std::process::{Command, Output};

use fewmode::io::{read_json, read_table, write_greens, write_spectrum, write_table};
use fewmode::spectral::{jmod_table, linspace};
use fewmode::synthetic::RandomModel;
use fewmode::ModelParams;

fn fewmode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fewmode")).args(args).output().expect("binary runs")
}

fn json_error(o: &Output) -> serde_json::Value {
    let err = String::from_utf8_lossy(&o.stderr);
    serde_json::from_str(err.lines().last().expect("stderr")).expect("json error line")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn synthetic_spectrum(dir: &Path, seed: u64, n: usize) -> (ModelParams, String) {
    let p = RandomModel::default().sample_seeded(seed, n);
    let path = dir.join("spectrum.csv");
    write_spectrum(&path, &jmod_table(&p, &linspace(0.4, 2.4, 2001)).unwrap()).unwrap();
    (p, path.to_str().unwrap().to_string())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn version_and_usage_errors() {
    let v = fewmode(&["--version"]);
    assert_eq!(code(&v), 0);
    assert!(String::from_utf8_lossy(&v.stdout).starts_with("fewmode "));
    assert_eq!(code(&fewmode(&["fit", "--bogus"])), 1);
    assert_eq!(code(&fewmode(&[])), 1);
    let j = fewmode(&["--json-errors", "dynamics", "--omega-eg", "1.0"]);
    assert_eq!(code(&j), 1);
    let v: serde_json::Value = json_error(&j);
    assert_eq!(v["error"]["kind"], "usage");
}

#[test]
fn fit_writes_params_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let (_, spec) = synthetic_spectrum(dir.path(), 3, 2);
    let out = dir.path().join("params.json");
    let report = dir.path().join("report.json");
    let o = fewmode(&["fit", &spec, "--n-modes", "2", "--out", s(&out), "--report", s(&report)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let p: ModelParams = read_json(&out).unwrap();
    assert_eq!(p.n_modes(), 2);
    let r: serde_json::Value = read_json(&report).unwrap();
    assert!(r["relative_l2_error"].as_f64().unwrap() < 1e-6);
    assert_eq!(r["converged"], true);
}

#[test]
fn non_convergence_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let (_, spec) = synthetic_spectrum(dir.path(), 4, 3);
    let out = dir.path().join("params.json");
    let o = fewmode(&[
        "--json-errors",
        "fit",
        &spec,
        "--n-modes",
        "3",
        "--max-iter",
        "1",
        "--restarts",
        "0",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 2);
    let v: serde_json::Value = json_error(&o);
    assert_eq!(v["error"]["kind"], "not_converged");
    assert!(out.exists());
}

#[test]
fn missing_input_is_io_error_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = fewmode(&["--json-errors", "pipeline", "absent.csv", "--omega-eg", "1.1", "--out-dir", s(&out)]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = json_error(&o);
    assert_eq!(v["error"]["kind"], "io");
    assert!(!out.exists());
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "omega_eV,J_eV\n1.0,0.5\n1.1,-0.2\n").unwrap();
    let o = fewmode(&["fit", s(&bad)]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains(":3:"));
}

#[test]
fn eval_and_poles() {
    let dir = tempfile::tempdir().unwrap();
    let (p, spec) = synthetic_spectrum(dir.path(), 5, 2);
    let params = dir.path().join("p.json");
    fewmode::io::write_json(&params, &p).unwrap();
    let out = dir.path().join("j.csv");
    assert_eq!(code(&fewmode(&["eval", "--params", s(&params), "--spectrum", &spec, "--out", s(&out)])), 0);
    let back = fewmode::io::ingest_spectrum(&out).unwrap().value;
    let orig = fewmode::io::ingest_spectrum(Path::new(&spec)).unwrap().value;
    for (a, b) in back.j().iter().zip(orig.j()) {
        assert!((a - b).abs() <= 1e-12 * orig.max_j());
    }
    let o =
        fewmode(&["eval", "--params", s(&params), "--grid", "0.5:2.0:11", "--purcell-mu", "0.55", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(read_table(&out).unwrap().columns, vec!["omega_eV", "J_eV", "purcell"]);
    let o = fewmode(&["poles", "--params", s(&params)]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["values"].as_array().unwrap().len(), 2);
}

#[test]
fn dynamics_variants_and_lossless_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let (p, spec) = synthetic_spectrum(dir.path(), 6, 2);
    let params = dir.path().join("p.json");
    fewmode::io::write_json(&params, &p).unwrap();
    let model = dir.path().join("model.csv");
    let exact = dir.path().join("exact.csv");
    let dense = dir.path().join("dense.csv");
    let common = ["--omega-eg", "1.3", "--tmax", "40", "--dt", "0.1"];
    let run = |extra: &[&str]| {
        let mut args: Vec<&str> = vec!["dynamics"];
        args.extend_from_slice(extra);
        args.extend_from_slice(&common);
        fewmode(&args)
    };
    assert_eq!(code(&run(&["--params", s(&params), "--tilde", "--out", s(&model)])), 0);
    assert_eq!(code(&run(&["--spectrum", &spec, "--exact", "--out", s(&exact)])), 0);
    assert_eq!(
        code(&run(&["--params", s(&params), "--lindblad-cutoff", "1", "--coupling", "rwa", "--out", s(&dense)])),
        0
    );
    assert_eq!(code(&run(&["--spectrum", &spec, "--out", s(&exact)])), 1);

    let m = read_table(&model).unwrap();
    assert_eq!(m.columns, vec!["t_fs", "pop_e", "pop_mode_1", "pop_mode_2", "pop_tilde_1", "pop_tilde_2"]);
    let d = read_table(&dense).unwrap();
    let e = read_table(&exact).unwrap();
    let (pm, pd, pe) = (m.column("pop_e").unwrap(), d.column("pop_e").unwrap(), e.column("pop_e").unwrap());
    for k in 0..pm.len() {
        assert!((pm[k] - pd[k]).abs() < 1e-6);
        assert!((pm[k] - pe[k]).abs() < 5e-3);
    }
    // re-writing what was read reproduces the file byte for byte
    let again = dir.path().join("again.csv");
    write_table(&again, &m).unwrap();
    assert_eq!(std::fs::read(&again).unwrap(), std::fs::read(&model).unwrap());
}

#[test]
fn field_traces_and_map() {
    let dir = tempfile::tempdir().unwrap();
    let p = ModelParams::diagonal(&[1.2], vec![0.05], vec![0.03]).unwrap();
    let params = dir.path().join("p.json");
    fewmode::io::write_json(&params, &p).unwrap();
    let om: Vec<f64> = linspace(0.6, 2.0, 701);
    let lor = |w: f64, a: f64| a * 0.025 / ((w - 1.2) * (w - 1.2) + 0.025 * 0.025);
    let gt = fewmode::field::GreensFunctionTable::new(
        vec!["near".into(), "far".into()],
        vec![[5.0, 0.0, 0.0], [1500.0, 0.0, 0.0]],
        om.clone(),
        vec![
            om.iter().map(|&w| [lor(w, 1e6), 0.0, 0.0]).collect(),
            om.iter().map(|&w| [0.0, 0.0, lor(w, 1e3)]).collect(),
        ],
    )
    .unwrap();
    let green = dir.path().join("g.csv");
    write_greens(&green, &gt).unwrap();
    let out = dir.path().join("I.csv");
    let base = [
        "field",
        "--params",
        s(&params),
        "--green",
        s(&green),
        "--mu",
        "0.55",
        "--omega-eg",
        "1.2",
        "--tmax",
        "20",
        "--dt",
        "0.1",
    ];
    let mut args = base.to_vec();
    args.extend(["--out", s(&out)]);
    let o = fewmode(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = read_table(&out).unwrap();
    assert_eq!(t.columns, vec!["t_fs", "I_near_W_per_m2", "I_far_W_per_m2"]);
    assert!(t.column("I_near_W_per_m2").unwrap().iter().all(|&v| v >= 0.0));

    let mut args = base.to_vec();
    args.extend(["--points", "far", "--map", "--times", "5,10", "--normalize", "--out", s(&out)]);
    assert_eq!(code(&fewmode(&args)), 0);
    let snap = read_table(&dir.path().join("I_t10fs.csv")).unwrap();
    assert_eq!(snap.rows.len(), 1);
    assert!(snap.rows[0][3] > 0.0 && snap.rows[0][3] <= 1.0);
}

#[test]
fn pipeline_on_synthetic_input() {
    let dir = tempfile::tempdir().unwrap();
    let (_, spec) = synthetic_spectrum(dir.path(), 8, 2);
    let out = dir.path().join("run");
    let o = fewmode(&[
        "pipeline",
        &spec,
        "--n-modes",
        "2",
        "--omega-eg",
        "1.3",
        "--tmax",
        "100",
        "--dt",
        "0.1",
        "--out-dir",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let cmp: serde_json::Value = read_json(&out.join("comparison.json")).unwrap();
    assert!(cmp["max_population_deviation"].as_f64().unwrap() < 1e-3);
}
