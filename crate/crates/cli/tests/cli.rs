use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn ids(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ids")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

/// Two well separated classes with an id column to drop.
fn write_dataset(path: &Path) {
    let mut s = String::from("id,a,b,kind\n");
    for i in 0..30 {
        let (c, off) = if i % 2 == 0 { ("attack", 10.0) } else { ("normal", 0.0) };
        s.push_str(&format!("{i},{},{},{c}\n", off + (i % 5) as f64 * 0.1, (i % 3) as f64));
    }
    fs::write(path, s).unwrap();
}

fn config(dir: &Path) -> Value {
    json!({
        "dataset_path": dir.join("data.csv"),
        "label_column": "kind",
        "drop_columns": ["id"],
        "ga": {"population_size": 6, "generations": 2, "seed": 1},
        "classifier": "dt",
        "cv": {"k": 3, "repeats": 1},
        "output_dir": dir.join("out"),
        "seed": 5
    })
}

fn write_config(dir: &Path, value: &Value) -> String {
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn setup() -> (tempfile::TempDir, String) {
    let tmp = tempfile::tempdir().unwrap();
    write_dataset(&tmp.path().join("data.csv"));
    let cfg = write_config(tmp.path(), &config(tmp.path()));
    (tmp, cfg)
}

#[test]
fn prep_select_eval_succeed() {
    let (tmp, cfg) = setup();
    for cmd in ["prep", "select", "eval"] {
        let out = ids(&[cmd, "--config", &cfg]);
        assert_eq!(code(&out), 0, "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out_dir = tmp.path().join("out");
    for f in ["prepared.csv", "selected.csv", "ga_result.json", "report.json", "report.md", "manifest_eval.json"] {
        assert!(out_dir.join(f).is_file(), "missing {f}");
    }
    let report: Value = serde_json::from_slice(&fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["overall"]["accuracy"], json!(1.0));
    assert!(!out_dir.join(".ids.lock").exists());
}

#[test]
fn seed_and_out_overrides() {
    let (tmp, cfg) = setup();
    let other = tmp.path().join("elsewhere");
    let out = ids(&["prep", "--config", &cfg, "--seed", "77", "--out", other.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!tmp.path().join("out").exists());
    let manifest: Value = serde_json::from_slice(&fs::read(other.join("manifest_prep.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], json!(77));
    assert_eq!(manifest["config"]["ga"]["seed"], json!(77));
}

#[test]
fn manifest_replays_as_config() {
    let (tmp, cfg) = setup();
    assert_eq!(code(&ids(&["prep", "--config", &cfg])), 0);
    let out_dir = tmp.path().join("out");
    let first = fs::read(out_dir.join("prepared.csv")).unwrap();
    let manifest = out_dir.join("manifest_prep.json");
    let replay = tmp.path().join("replay");
    let out = ids(&["prep", "--config", manifest.to_str().unwrap(), "--out", replay.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read(replay.join("prepared.csv")).unwrap(), first);
}

#[test]
fn configuration_problems_exit_one() {
    let (tmp, _) = setup();
    let mut bad = config(tmp.path());
    bad["populaton_size"] = json!(3);
    let cfg = write_config(tmp.path(), &bad);
    assert_eq!(code(&ids(&["prep", "--config", &cfg])), 1);

    let mut bad = config(tmp.path());
    bad["cv"]["k"] = json!(1);
    let cfg = write_config(tmp.path(), &bad);
    assert_eq!(code(&ids(&["prep", "--config", &cfg])), 1);

    assert_eq!(code(&ids(&["prep"])), 1);
    assert_eq!(code(&ids(&["frobnicate", "--config", &cfg])), 1);
    assert_eq!(code(&ids(&["prep", "--config", &cfg, "--seed", "minus"])), 1);
    assert_eq!(code(&ids(&["--help"])), 0);
}

#[test]
fn data_problems_exit_two() {
    let (tmp, _) = setup();
    let mut bad = config(tmp.path());
    bad["label_column"] = json!("no_such_column");
    let cfg = write_config(tmp.path(), &bad);
    assert_eq!(code(&ids(&["prep", "--config", &cfg])), 2);

    let cfg = write_config(tmp.path(), &config(tmp.path()));
    let out = ids(&["select", "--config", &cfg]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn locked_output_exits_one() {
    let (tmp, cfg) = setup();
    let out_dir = tmp.path().join("out");
    fs::create_dir_all(&out_dir).unwrap();
    fs::write(out_dir.join(".ids.lock"), "").unwrap();
    assert_eq!(code(&ids(&["prep", "--config", &cfg])), 1);
}
