use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const ARNOLD: &str = r#"{"family":"arnold","eps":0.5,"a":0.6145263876778699,"angle":"golden"}"#;
const CONJUGATED: &str = r#"{"family":"conjugated","rho":"golden","h":[[0.02,0.03],[-0.01,0.008],[0.004,-0.003]]}"#;

fn circlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_circlab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn dir_is_empty(p: &Path) -> bool {
    fs::read_dir(p).unwrap().next().is_none()
}

#[test]
fn cf_lists_fibonacci_denominators() {
    let o = circlab(&["cf", "--angle", "golden", "--depth", "10"]);
    assert!(o.status.success());
    let rows: Vec<Value> = serde_json::from_str(&stdout(&o)).unwrap();
    let qs: Vec<u64> = rows.iter().map(|r| r["q"].as_u64().unwrap()).collect();
    assert_eq!(qs, [1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("\"depth\":10"));
}

#[test]
fn lemma_bound_dominates_defect() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("arnold.json");
    fs::write(&map, ARNOLD).unwrap();
    let out = dir.path().join("lemma.csv");
    let o = circlab(&["lemma", "--map", map.to_str().unwrap(), "--k", "4..10", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# config: "));
    assert_eq!(text.lines().nth(1), Some("k,q,identity_residual_max,defect,bound"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 7);
    for r in rows {
        assert!(r[3] <= r[4], "{r:?}");
    }
}

#[test]
fn malformed_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    let o = circlab(&["lemma", "--map", "{\"family\": ", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"command":{"name":"cf","angle":"golden","depth":5},"surprise":true}"#).unwrap();
    let o = circlab(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    fs::remove_file(&cfg).unwrap();
    assert!(dir_is_empty(dir.path()));
}

#[test]
fn missing_map_file_is_an_io_error() {
    let o = circlab(&["herman", "--map", "/definitely/not/here.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn tolerance_failure_still_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solve.json");
    let o = circlab(&["solve", "--map", CONJUGATED, "--u", "cos-pullback", "--tol-scale", "1e-30", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v["coboundary_defect"].as_f64().unwrap() < 1e-6);
}

#[test]
fn runs_are_byte_identical() {
    let args = ["herman", "--map", r#"{"family":"rotation","rho":"silver"}"#, "--kmax", "8"];
    let a = circlab(&args);
    let b = circlab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn denjoy_pipeline_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("map.json");
    let o = circlab(&["denjoy", "build", "--angle", "golden", "--M", "64", "--out", map.to_str().unwrap()]);
    assert!(o.status.success());
    let record: Value = serde_json::from_str(&fs::read_to_string(&map).unwrap()).unwrap();
    assert_eq!(record["gaps"].as_array().unwrap().len(), 129);

    let o = circlab(&["denjoy", "nu", "--map", map.to_str().unwrap()]);
    assert!(o.status.success());
    let nu: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((nu["S"].as_f64().unwrap() - 5.0).abs() < 1e-10);
    assert_eq!(nu["points"].as_array().unwrap().len(), 129);

    let o = circlab(&["distribution", "--map", map.to_str().unwrap(), "--tests", "gap,fourier", "--M", "64"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let d: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((d["L_values"]["bump(I_0, slope 5)"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert!(d["nu_vs_lambda"].as_f64().unwrap() > 0.09);
}

#[test]
fn tampered_gap_table_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("map.json");
    assert!(circlab(&["denjoy", "build", "--M", "16", "--out", map.to_str().unwrap()]).status.success());
    let mut record: Value = serde_json::from_str(&fs::read_to_string(&map).unwrap()).unwrap();
    record["gaps"][3]["len"] = Value::from(0.5);
    fs::write(&map, record.to_string()).unwrap();
    assert_eq!(circlab(&["denjoy", "nu", "--map", map.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn rotnum_encloses_the_angle() {
    let o = circlab(&["rotnum", "--map", CONJUGATED, "--depth", "12"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let iv: Vec<f64> = v["rho_interval"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let g = (5f64.sqrt() - 1.0) / 2.0;
    assert!(iv[0] <= g && g <= iv[1]);
    assert_eq!(v["certified_k"], 12);
}
