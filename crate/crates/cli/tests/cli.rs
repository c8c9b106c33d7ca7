use std::path::Path;
use std::process::{Command, Output};

use peakon_cli::io::RunManifest;

fn peakon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_peakon")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn csv_column(text: &str, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let i = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[i].parse().unwrap()).collect()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn no_arguments_prints_usage() {
    let o = peakon(&[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn unknown_flag_is_usage_error() {
    let o = peakon(&["speed", "--nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn domain_error_exit_code() {
    let o = peakon(&["speed", "--kappa", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = peakon(&["wave", "--kappa", "0", "--c", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn speed_rows() {
    let o = peakon(&["speed", "--kappa", "0", "--kappa", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("kappa,c,residual,gap,gap_over_sqrt_kappa"));
    let c = csv_column(&text, "c");
    assert!((c[0] - 1.585201).abs() < 1e-6);
    assert!((c[1] - 2f64.sqrt() - 0.1552702843).abs() < 1e-9);
}

#[test]
fn wave_outputs_manifest_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = peakon(&["wave", "--kappa", "1", "--grid", "100", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv");
    let b = run("b.csv");
    assert_eq!(a, b);
    let side = json(&dir.path().join("b.json"));
    assert!(side["orbit_max_drift"].as_f64().unwrap() < 1e-7);
    let m = RunManifest::read(dir.path()).unwrap();
    assert_eq!(m.outputs.len(), 2);
    assert!(m.verify(dir.path()).unwrap().is_empty());
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# speeds\nkappa = 1\ntol = 1e-12\n").unwrap();
    let o = peakon(&["--config", cfg.to_str().unwrap(), "speed"]);
    assert!(o.status.success());
    let c = csv_column(&stdout(&o), "c");
    assert_eq!(c.len(), 1);
    assert!((c[0] - 2f64.sqrt() - 0.1552702843).abs() < 1e-9);
    let o = peakon(&["--config", cfg.to_str().unwrap(), "speed", "--kappa", "0"]);
    let c = csv_column(&stdout(&o), "c");
    assert!((c[0] - 1.585201).abs() < 1e-6);
}

#[test]
fn simulate_writes_snapshots_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let o = peakon(&[
        "simulate",
        "--experiment",
        "gaussian-v",
        "--modes",
        "128",
        "--tmax",
        "0.05",
        "--snap-every",
        "25",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = json(&out.join("report.json"));
    assert_eq!(rep["termination"], "t_max");
    for step in [0, 25, 50] {
        assert!(out.join(format!("snapshot_{step:07}.csv")).exists());
    }
    let m = RunManifest::read(&out).unwrap();
    assert_eq!(m.outputs.len(), 5);
    assert!(m.verify(&out).unwrap().is_empty());

    let snap = out.join("snapshot_0000050.csv");
    let o = peakon(&["analyze-blowup", "--snapshot", snap.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["x_star_estimate"].is_number());
}

#[test]
fn custom_experiment_needs_init() {
    let o = peakon(&["simulate", "--experiment", "custom", "--L", "5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_blowup_recovers_synthetic_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let n = 1024;
    let l = 15.0;
    let dx = 2.0 * l / n as f64;
    let xs = -l + 853.0 * dx;
    let mut text = String::from("x,rho,v,phi\n");
    for j in 0..n {
        let x = -l + j as f64 * dx;
        let d = (x - xs).abs();
        text += &format!("{x},{},{},0\n", 1.0 + d.max(1e-3).powf(-2.0 / 3.0), -d.powf(2.0 / 3.0));
    }
    let p = dir.path().join("snap.csv");
    std::fs::write(&p, text).unwrap();
    let o = peakon(&["analyze-blowup", "--snapshot", p.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let e = v["v_exponent_fit"]["exponent"].as_f64().unwrap();
    assert!((e - 2.0 / 3.0).abs() < 0.01, "{e}");
}

#[test]
fn repro_fig1_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let o = peakon(&["repro", "--target", "fig1", "--out-dir", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&dir.path().join("summary.json"));
    let t = s["thickness"].as_f64().unwrap();
    assert!(t > 0.0028 && t < 0.0112, "{t}");
    assert!(s["within_factor_two"].as_bool().unwrap());
    assert!(RunManifest::read(dir.path()).unwrap().verify(dir.path()).unwrap().is_empty());
}
