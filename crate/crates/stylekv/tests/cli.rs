use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use stylekv::record::RunRecord;
use stylekv_core::decoder::{GenerationTrace, TraceEntry};
use stylekv_core::toymodel::ToyConfig;

fn stylekv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stylekv")).args(args).output().unwrap()
}

fn ok(args: &[&str]) {
    let out = stylekv(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn build_model(dir: &Path, cfg: &ToyConfig) -> PathBuf {
    let config = dir.join("config.json");
    fs::write(&config, serde_json::to_string(cfg).unwrap()).unwrap();
    let model = dir.join("model.json");
    ok(&["build-model", "--config", s(&config), "--out", s(&model)]);
    model
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn build_model_is_deterministic_and_loads() {
    let dir = tempfile::tempdir().unwrap();
    let a = build_model(dir.path(), &ToyConfig::default());
    let b = dir.path().join("again.json");
    ok(&["build-model", "--config", s(&dir.path().join("config.json")), "--out", s(&b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let model = stylekv::weights_file::load(&a).unwrap();
    let dims = model.decoder.dims();
    assert_eq!((dims.layers, dims.d_model, dims.vocab), (2, 16, 64));
}

#[test]
fn build_model_accepts_partial_config_and_rejects_zero_commit() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    fs::write(&config, r#"{"commit_len": 6}"#).unwrap();
    let out = dir.path().join("m.json");
    ok(&["build-model", "--config", s(&config), "--out", s(&out)]);
    assert_eq!(stylekv::weights_file::load(&out).unwrap().config.commit_len, 6);

    fs::write(&config, r#"{"commit_len": 0}"#).unwrap();
    let bad = dir.path().join("bad.json");
    let res = stylekv(&["build-model", "--config", s(&config), "--out", s(&bad)]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("commit_len"));
    assert!(!bad.exists());
}

#[test]
fn interp_sweep_endpoints_and_midpoint() {
    let dir = tempfile::tempdir().unwrap();
    let model = build_model(dir.path(), &ToyConfig::default());
    let out = dir.path().join("sweep.csv");
    ok(&["interp-sweep", "--model", s(&model), "--alphas", "0,2", "--out", s(&out)]);
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["alpha", "attribute_mean", "sign_class"]);
    assert_eq!(rows.len(), 3);

    ok(&["interp-sweep", "--model", s(&model), "--alphas", "0,1,2", "--out", s(&out)]);
    let v: Vec<f32> = csv_rows(&out)[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!((v[1] - (v[0] + v[2]) / 2.0).abs() <= 0.02, "{v:?}");

    ok(&["interp-sweep", "--model", s(&model), "--alphas", "-1,-0.5,0,0.5,1,1.5,2", "--out", s(&out)]);
    let v: Vec<f32> = csv_rows(&out)[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(v.windows(2).all(|p| p[0] < p[1]), "{v:?}");
}

#[test]
fn transition_writes_a_replayable_record() {
    let dir = tempfile::tempdir().unwrap();
    let model = build_model(dir.path(), &ToyConfig::default());
    let out = dir.path().join("run.json");
    ok(&[
        "transition", "--model", s(&model), "--t-star", "64", "--k", "4", "--window", "8", "--alpha", "2",
        "--steps", "128", "--seed", "0", "--out", s(&out),
    ]);
    let record: RunRecord = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(record.segments.delta >= 0.8 * 2.0);
    assert!(record.swap.performed);
    assert_eq!(record.tokens.len(), 128);
    assert_eq!(record.engine_version, stylekv_core::VERSION);
    let loaded = stylekv::weights_file::load(&model).unwrap();
    assert_eq!(stylekv::experiments::replay(&loaded, &record).unwrap(), record.tokens);
}

#[test]
fn transition_flags_route_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let model = build_model(dir.path(), &ToyConfig::default());
    let out = dir.path().join("naive.json");
    ok(&["transition", "--model", s(&model), "--naive", "--window", "full", "--out", s(&out)]);
    let record: RunRecord = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(!record.swap.performed);
    assert_eq!(record.settings.window.to_string(), "full");

    let beta = dir.path().join("beta.json");
    ok(&["transition", "--model", s(&model), "--beta", "-0.5", "--alpha", "1.5", "--out", s(&beta)]);

    let bad = dir.path().join("bad.json");
    let res = stylekv(&["transition", "--model", s(&model), "--t-star", "10", "--out", s(&bad)]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("transition precedes committed prefix"));
    assert!(!bad.exists());

    let res = stylekv(&["transition", "--model", s(&model), "--window", "0", "--out", s(&bad)]);
    assert!(!res.status.success());
}

#[test]
fn grid_has_one_sorted_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let model = build_model(dir.path(), &ToyConfig::default());
    let out = dir.path().join("grid.csv");
    ok(&["grid", "--model", s(&model), "--windows", "full,32,8,16", "--ks", "4,0,2", "--alpha", "2", "--out", s(&out)]);
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["window", "k", "delta_attribute", "sign_class"]);
    let keys: Vec<String> = rows[1..].iter().map(|r| format!("{}/{}", r[0], r[1])).collect();
    let expected: Vec<String> = ["8", "16", "32", "full"]
        .iter()
        .flat_map(|w| [0, 2, 4].map(|k| format!("{w}/{k}")))
        .collect();
    assert_eq!(keys, expected);
    for r in &rows[1..] {
        let d: f32 = r[2].parse().unwrap();
        if r[1] == "0" {
            assert!(d.abs() <= 0.2, "{r:?}");
        }
    }
}

#[test]
fn diagnose_writes_variance_and_maps() {
    let dir = tempfile::tempdir().unwrap();
    let model = build_model(dir.path(), &ToyConfig::default());
    let run = dir.path().join("run.json");
    ok(&["transition", "--model", s(&model), "--out", s(&run)]);
    let out = dir.path().join("diag");
    ok(&["diagnose", "--run", s(&run), "--out", s(&out)]);
    let var = csv_rows(&out.join("variance.csv"));
    assert_eq!(var[0], ["position", "layer", "var"]);
    assert_eq!(var.len() - 1, 128 * 2);
    let early = var[1..].iter().filter(|r| r[1] == "0" && r[0].parse::<usize>().unwrap() <= 4);
    let late = var[1..].iter().filter(|r| r[1] == "0" && r[0].parse::<usize>().unwrap() > 4);
    let min_early = early.map(|r| r[2].parse::<f64>().unwrap()).fold(f64::INFINITY, f64::min);
    let max_late = late.map(|r| r[2].parse::<f64>().unwrap()).fold(0.0, f64::max);
    assert!(max_late < min_early);

    let map = csv_rows(&out.join("attention_layer0.csv"));
    assert_eq!(map.len(), 1 + 6);
    assert_eq!(map[0].len(), 1 + 128);
    let peak: f32 = map[1 + 2][1].parse().unwrap();
    assert!(peak > 0.999);
    let late_cell: f32 = map[1][100].parse().unwrap();
    assert!((late_cell - 1.0 / 6.0).abs() < 1e-4);
    assert!(out.join("attention_layer1.csv").exists());
}

#[test]
fn diagnose_uniform_trace_has_zero_variance() {
    let dir = tempfile::tempdir().unwrap();
    let model = build_model(dir.path(), &ToyConfig::default());
    let run = dir.path().join("run.json");
    ok(&["transition", "--model", s(&model), "--out", s(&run)]);
    let mut record: RunRecord = serde_json::from_str(&fs::read_to_string(&run).unwrap()).unwrap();
    record.trace = Some(GenerationTrace {
        entries: (0..3)
            .map(|_| TraceEntry { token: 0, cross_weights: vec![vec![0.25; 4]], allowed: 1, logits: vec![] })
            .collect(),
    });
    fs::write(&run, serde_json::to_string(&record).unwrap()).unwrap();
    let out = dir.path().join("diag");
    ok(&["diagnose", "--run", s(&run), "--out", s(&out)]);
    let var = csv_rows(&out.join("variance.csv"));
    assert_eq!(var.len(), 4);
    assert!(var[1..].iter().all(|r| r[2].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn diagnose_without_trace_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let model = build_model(dir.path(), &ToyConfig::default());
    let run = dir.path().join("run.json");
    ok(&["transition", "--model", s(&model), "--out", s(&run)]);
    let mut record: RunRecord = serde_json::from_str(&fs::read_to_string(&run).unwrap()).unwrap();
    record.trace = None;
    fs::write(&run, serde_json::to_string(&record).unwrap()).unwrap();
    let out = dir.path().join("diag");
    let res = stylekv(&["diagnose", "--run", s(&run), "--out", s(&out)]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("no trace"));
    assert!(!out.exists());
}

#[test]
fn missing_model_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let res = stylekv(&["grid", "--model", s(&dir.path().join("nope.json")), "--out", s(&out)]);
    assert!(!res.status.success());
    assert!(!out.exists());
}
