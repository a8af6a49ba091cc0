use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn shellspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shellspec")).args(args).env("SHELLSPEC_THREADS", "1").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn shell_json_reports_the_dirichlet_shell_eigenvalue() {
    let o = shellspec(&["shell", "--dim", "3", "--inner", "dirichlet", "--outer", "dirichlet", "--json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let lambda = v["lambda"].as_f64().unwrap();
    assert!((lambda - std::f64::consts::PI.powi(2)).abs() < 1e-9);
    assert_eq!(v["zero_count"], 0);
}

#[test]
fn invalid_shell_is_a_usage_error() {
    let o = shellspec(&["shell", "--beta", "0.5"]);
    assert_eq!(code(&o), 2);
    assert!(!o.stderr.is_empty());
}

#[test]
fn mesh_then_fem_extrapolates_the_eccentric_annulus() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = path(dir.path(), "m.json");
    let o = shellspec(&["mesh", "--fixture", "eccentric-annulus", "--ntheta", "32", "--nr", "4", "--out", &mesh]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = shellspec(&["fem", "--mesh", &mesh, "--levels", "4", "--json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let ex = &v["extrapolated"];
    // spectral collocation value for Robin(1) on both loops
    let lambda = ex["lambda"].as_f64().unwrap();
    assert!((lambda - 1.500642823104646).abs() < 5e-5 * 1.5, "{v}");
    assert!((ex["order"].as_f64().unwrap() - 2.0).abs() < 0.2);
}

#[test]
fn counterexample_single_k_is_reversed() {
    let dir = tempfile::tempdir().unwrap();
    let csv = path(dir.path(), "c.csv");
    let o = shellspec(&["counterexample", "--k", "16", "--csv", &csv]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let header: Vec<&str> = lines[0].split(',').collect();
    let row: Vec<&str> = lines[1].split(',').collect();
    let col = header.iter().position(|h| *h == "reversed").unwrap();
    assert_eq!(row[col], "true");
}

#[test]
fn one_point_grid_gives_one_csv_row_and_stable_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = path(dir.path(), sub);
        let o = shellspec(&["suite", "shell-tables", "--grid", "2.0", "--out-dir", &out]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
        let csv = fs::read(dir.path().join(sub).join("shell_tables.csv")).unwrap();
        let svg = fs::read(dir.path().join(sub).join("split_curves.svg")).unwrap();
        (csv, svg)
    };
    let (csv_a, svg_a) = run("a");
    let (csv_b, svg_b) = run("b");
    assert_eq!(String::from_utf8_lossy(&csv_a).lines().count(), 2);
    assert_eq!(csv_a, csv_b);
    assert_eq!(svg_a, svg_b);
    assert!(dir.path().join("a").join("results.json").exists());
}

#[test]
fn unknown_suite_is_a_usage_error() {
    assert_eq!(code(&shellspec(&["suite", "no-such-suite"])), 2);
}

#[test]
fn config_file_overrides_flags_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let good = path(dir.path(), "good.json");
    fs::write(&good, r#"{"dim": 3, "inner": "dirichlet", "outer": "dirichlet", "json": true}"#).unwrap();
    let o = shellspec(&["--config", &good, "shell"]);
    assert_eq!(code(&o), 0);
    assert!((json(&o)["lambda"].as_f64().unwrap() - 9.869604401089358).abs() < 1e-9);

    let bad = path(dir.path(), "bad.json");
    fs::write(&bad, r#"{"bogus": 1}"#).unwrap();
    assert_eq!(code(&shellspec(&["--config", &bad, "shell"])), 2);
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let o =
        Command::new(env!("CARGO_BIN_EXE_shellspec")).args(["shell"]).env("SHELLSPEC_THREADS", "x").output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn hw_verify_holds_on_the_eccentric_annulus() {
    let o = shellspec(&["hw-verify", "--fixture", "eccentric-annulus", "--json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn morse3d_classifies_three_points() {
    let o = shellspec(&["morse3d", "--classify"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let pts = v["critical_points"]["points"].as_array().unwrap();
    assert_eq!(pts.len(), 3);
    let mut idx: Vec<u64> = pts.iter().map(|p| p["index"].as_u64().unwrap()).collect();
    idx.sort();
    assert_eq!(idx, [0, 0, 1]);
}

#[test]
fn flow_svg_draws_two_fronts_per_recorded_time() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = path(dir.path(), "m.json");
    assert_eq!(
        code(&shellspec(&["mesh", "--fixture", "eccentric-annulus", "--ntheta", "32", "--nr", "4", "--out", &mesh])),
        0
    );
    let csv = path(dir.path(), "s.csv");
    let svg = path(dir.path(), "f.svg");
    let o = shellspec(&["flow", "--mesh", &mesh, "--tmax", "2", "--csv", &csv, "--svg", &svg]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v = json(&o);
    let entries = v["entries"].as_u64().unwrap() as usize;
    let rows = fs::read_to_string(&csv).unwrap().lines().count() - 1;
    assert_eq!(rows, entries);
    let polylines = fs::read_to_string(&svg).unwrap().matches("<polyline").count();
    assert_eq!(polylines, 2 * entries);
}

#[test]
fn missing_mesh_file_is_a_usage_error() {
    assert_eq!(code(&shellspec(&["fem", "--mesh", "/nonexistent/mesh.json"])), 2);
}
