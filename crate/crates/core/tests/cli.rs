use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use monostatic::geometry::import_mesh;

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monostatic"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn imu_prints_degrees_and_arcsec() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["imu"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0.00573 deg") && text.contains("20.6 arcsec"), "{text}");
    let out = run(dir.path(), &["imu", "--scale-mm", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn export_writes_a_readable_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("primary.stl");
    let out = run(
        dir.path(),
        &["export", "primary", "--format", "stl", "--resolution", "20x40", "--path", path.to_str().unwrap()],
    );
    assert!(out.status.success());
    let mesh = import_mesh(&path).unwrap();
    assert_eq!(mesh.faces().len(), 2 * 40 * 19);
}

#[test]
fn landscape_output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["landscape", "eta:0.05", "--n-dirs", "600", "--resolution", "30x60"];
    assert!(run(a.path(), &args).status.success());
    assert!(run(b.path(), &args).status.success());
    let ca = fs::read(a.path().join("landscape.csv")).unwrap();
    assert_eq!(ca, fs::read(b.path().join("landscape.csv")).unwrap());
    assert_eq!(
        fs::read(a.path().join("report.json")).unwrap(),
        fs::read(b.path().join("report.json")).unwrap()
    );
    let text = String::from_utf8(ca).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "direction_x,direction_y,direction_z,longitude,latitude,height,basin_id"
    );
    assert_eq!(lines.count(), 600);
}

#[test]
fn validate_exit_code_follows_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["validate", "--resolution", "40x80"]);
    let v = json(&dir.path().join("validate.json"));
    let all = v["checks"].as_array().unwrap().iter().all(|c| c["pass"].as_bool().unwrap());
    assert_eq!(out.status.success(), all);
    assert_eq!(out.status.code(), Some(if all { 0 } else { 1 }));
    let csv = fs::read_to_string(dir.path().join("validate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn verify_exit_code_follows_battery() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify", "second"]);
    let v = json(&dir.path().join("verify.json"));
    assert_eq!(v["cells"].as_array().unwrap().len(), 12);
    assert_eq!(out.status.success(), v["pass"].as_bool().unwrap());
}

#[test]
fn ballast_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["ballast", "sphere", "cylinder", "--resolution", "40x80"]);
    assert!(out.status.code().is_some_and(|c| c <= 1));
    let csv = fs::read_to_string(dir.path().join("ballast.csv")).unwrap();
    assert!(csv.starts_with("geometry,w,ecs,boa\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 7);
    let summary = json(&dir.path().join("ballast.json"));
    assert_eq!(summary["sphere"].as_f64(), Some(0.05));
    assert!(summary["cylinder"].is_null());
}

#[test]
fn short_optimize_campaign_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("campaign.toml");
    fs::write(&cfg, "[de]\nmax_generations = 2\npopulation = 6\n[oracle]\nn_dirs = 500\n").unwrap();
    let out = run(dir.path(), &["--config", cfg.to_str().unwrap(), "--seed", "3", "optimize"]);
    assert!(out.status.code().is_some_and(|c| c <= 1), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("generation,best_objective,beta,a_1\n"));
    assert!(trace.lines().count() <= 4);
    let result = json(&dir.path().join("optimize.json"));
    assert_eq!(out.status.success(), result["verification"]["pass"].as_bool().unwrap());
}

#[test]
fn bad_arguments_fail() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["verify", "cube"]).status.code(), Some(2));
    assert!(!run(dir.path(), &["landscape", "--resolution", "abc"]).status.success());
    assert_eq!(run(dir.path(), &["--k", "2", "imu"]).status.code(), Some(2));
}
