use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

const LAG: &str = r#"{"A":[[-1.0]],"B":[[1.0]],"C":[[1.0]],"D":[[0.0]]}"#;

fn srgkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srgkit"))
        .current_dir(dir)
        .env_remove("SRGKIT_OUT")
        .args(["--out", "out"])
        .args(args)
        .output()
        .expect("binary runs")
}

fn file(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, contents).unwrap();
    p
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn lag_with_single_base_point_is_unit_interval_disk() {
    let dir = TempDir::new().unwrap();
    file(&dir, "lag.json", LAG);
    let o = srgkit(dir.path(), &["srg-lti", "lag.json", "--upsilon", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(dir.path().join("out/region.json"));
    assert_eq!(r["kind"], "disk_algebra");
    let upper = r["upper"].as_array().unwrap();
    assert_eq!(upper.len(), 1);
    assert_eq!(upper[0][0].as_f64().unwrap(), 0.5);
    assert!((upper[0][1].as_f64().unwrap() - 0.5).abs() < 1e-3);
    let lower = r["lower"].as_array().unwrap();
    assert!(lower[0][1].as_f64().unwrap() <= 0.5);
    for f in ["sigma.csv", "region.svg", "region_boundary.csv", "manifest.json"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
}

#[test]
fn malformed_json_is_input_error() {
    let dir = TempDir::new().unwrap();
    file(&dir, "bad.json", r#"{"A": [[-1.0]], "B": "#);
    let o = srgkit(dir.path(), &["srg-lti", "bad.json"]);
    assert_eq!(o.status.code(), Some(2));
    let m = json(dir.path().join("out/manifest.json"));
    assert_eq!(m["exit_code"], 2);
    assert!(m["error"].as_str().unwrap().contains("bad.json"));
}

#[test]
fn missing_file_is_input_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(srgkit(dir.path(), &["srg-lti", "nope.json"]).status.code(), Some(2));
}

#[test]
fn unstable_model_violates_hypothesis() {
    let dir = TempDir::new().unwrap();
    file(&dir, "unstable.json", r#"{"A":[[1.0]],"B":[[1.0]],"C":[[1.0]],"D":[[0.0]]}"#);
    let o = srgkit(dir.path(), &["srg-lti", "unstable.json"]);
    assert_eq!(o.status.code(), Some(3));
}

fn disk_region(c: f64, r: f64) -> String {
    format!(r#"{{"kind":"disk_algebra","upper":[[{c},{r}]]}}"#)
}

#[test]
fn region_inverse_of_interval_disk() {
    let dir = TempDir::new().unwrap();
    file(&dir, "d.json", &disk_region(1.5, 0.5));
    let o = srgkit(dir.path(), &["region", "inverse", "d.json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(dir.path().join("out/region.json"));
    let d = &r["upper"][0];
    assert!((d[0].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert!((d[1].as_f64().unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn region_rmin_prints_scalar() {
    let dir = TempDir::new().unwrap();
    file(&dir, "d.json", &disk_region(-1.5, 0.5));
    let o = srgkit(dir.path(), &["region", "rmin", "d.json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert_eq!(v, 2.0);
}

#[test]
fn region_product_writes_cover() {
    let dir = TempDir::new().unwrap();
    file(&dir, "a.json", &disk_region(1.0, 0.5));
    file(&dir, "b.json", &disk_region(-2.0, 0.5));
    let o = srgkit(dir.path(), &["region", "product", "a.json", "b.json", "--resolution", "0.02"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(dir.path().join("out/region.json"));
    assert_eq!(r["kind"], "cover");
    assert!(r["epsilon"].as_f64().unwrap() > 0.0);
}

#[test]
fn region_scale_needs_alpha() {
    let dir = TempDir::new().unwrap();
    file(&dir, "d.json", &disk_region(1.0, 0.5));
    assert_eq!(srgkit(dir.path(), &["region", "scale", "d.json"]).status.code(), Some(2));
    assert_eq!(srgkit(dir.path(), &["region", "scale", "d.json", "--alpha", "-2"]).status.code(), Some(0));
}

fn feedback(h1: (f64, f64), h2: (f64, f64)) -> String {
    format!(r#"{{"h1": {{"region": {}}}, "h2": {{"region": {}}}}}"#, disk_region(h1.0, h1.1), disk_region(h2.0, h2.1))
}

#[test]
fn separated_feedback_is_certified() {
    let dir = TempDir::new().unwrap();
    file(&dir, "fb.json", &feedback((0.0, 0.5), (0.0, 0.5)));
    let o = srgkit(dir.path(), &["analyze-feedback", "fb.json", "--tau-points", "11", "--resolution", "0.01"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rep = json(dir.path().join("out/report.json"));
    assert_eq!(rep["verdict"], "certified");
    let gain = rep["gain_bound"].as_f64().unwrap();
    // H1 = 1/2, H2 = -1/2 attains (1/2)/(1 - 1/4), so no sound bound is smaller
    assert!((2.0 / 3.0 - 1e-9..0.7).contains(&gain), "{gain}");
    assert!(dir.path().join("out/separation.csv").exists());
}

#[test]
fn overlapping_feedback_is_not_certified() {
    let dir = TempDir::new().unwrap();
    file(&dir, "fb.json", &feedback((0.0, 2.0), (-1.0, 0.5)));
    let o = srgkit(dir.path(), &["analyze-feedback", "fb.json", "--tau-points", "11", "--resolution", "0.01"]);
    assert_eq!(o.status.code(), Some(4), "{}", stdout(&o));
    assert_eq!(json(dir.path().join("out/manifest.json"))["exit_code"], 4);
}

#[test]
fn sector_check_flags_wrong_declaration() {
    let dir = TempDir::new().unwrap();
    file(&dir, "sat.json", r#"{"kind": "saturation", "limit": 1.0}"#);
    let ok = srgkit(dir.path(), &["sector", "sat.json"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert_eq!(json(dir.path().join("out/sector_check.json"))["ok"], true);
    // slope 1 everywhere but offset by 2, so the ray sector [1, 1] fails
    file(&dir, "offset.json", r#"{"kind": "table", "xs": [-1.0, 1.0], "ys": [1.0, 3.0]}"#);
    let bad = srgkit(dir.path(), &["sector", "offset.json", "--non-incremental"]);
    assert_eq!(bad.status.code(), Some(3));
    assert_eq!(json(dir.path().join("out/sector_check.json"))["ok"], false);
}

#[test]
fn env_fallback_sets_output_directory() {
    let dir = TempDir::new().unwrap();
    file(&dir, "d.json", &disk_region(1.0, 0.5));
    let o = Command::new(env!("CARGO_BIN_EXE_srgkit"))
        .current_dir(dir.path())
        .env("SRGKIT_OUT", "from-env")
        .env("SRGKIT_ALPHA", "3")
        .args(["region", "shift", "d.json"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let r = json(dir.path().join("from-env/region.json"));
    assert_eq!(r["upper"][0][0].as_f64().unwrap(), 4.0);
    let m = json(dir.path().join("from-env/manifest.json"));
    assert_eq!(m["command"], "region");
    assert_eq!(m["inputs"][0]["path"], "d.json");
}

#[test]
fn exported_model_round_trips_through_analysis() {
    let dir = TempDir::new().unwrap();
    let o = srgkit(dir.path(), &["export-model", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let name = stdout(&o).trim().to_string();
    let path = format!("out/{name}");
    let m = json(dir.path().join(&path));
    assert_eq!(m["nonlinearities"].as_array().unwrap().len(), 2);
    let o = srgkit(dir.path(), &["simulate", &path, "--multisines", "2", "--noise-pairs", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let g = json(dir.path().join("out/gain.json"));
    assert!(g["value"].as_f64().unwrap() > 0.0);
    assert!(dir.path().join("out/best_pair_signals.csv").exists());
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = TempDir::new().unwrap();
    file(&dir, "d.json", &disk_region(1.0, 0.5));
    file(&dir, "blocker", "not a directory");
    let o = Command::new(env!("CARGO_BIN_EXE_srgkit"))
        .current_dir(dir.path())
        .args(["--out", "blocker/sub", "region", "shift", "d.json", "--alpha", "1"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
