use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stdmap-lab"))
        .args(["--threads", "1", "--out"])
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &["clt", "--bogus", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
}

#[test]
fn violated_preconditions_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &["clt", "--L", "1e6", "--M", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!stderr(&o).is_empty());
    let o = lab(dir.path(), &["pushforward", "--L", "1e3", "--n", "5", "--mode", "exhaustive"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cap"), "{}", stderr(&o));
}

#[test]
fn lag_one_ygrid_correlation_vanishes() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &["corr", "--L", "1000", "--n", "1", "--method", "ygrid"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&dir.path().join("corr.json"));
    assert!(v["result"]["estimate"].as_f64().unwrap().abs() <= 1e-12);
}

#[test]
fn small_clt_run_writes_summary_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &["clt", "--L", "1e4", "--N", "3", "--M", "2e3", "--seed", "7", "--samples"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&dir.path().join("clt.json"));
    assert_eq!(v["result"]["summary"]["m"], 2000);
    let samples = std::fs::read_to_string(dir.path().join("clt_samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 2001);
    assert!(!samples.contains('\r'));
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["subcommand"], "clt");
    assert_eq!(manifest["seed"], 7);
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# a comment\nL = 1e4\nN = 3\nM = 500\nseed = 3\n").unwrap();
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_stdmap-lab"))
        .args(["--threads", "1", "--out"])
        .arg(&out)
        .args(["--config"])
        .arg(&cfg)
        .args(["clt", "--M", "700"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&out.join("clt.json"));
    assert_eq!(v["result"]["summary"]["m"], 700);
    assert_eq!(v["config"]["seed"], 3);
}

#[test]
fn simulate_dumps_a_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(dir.path(), &["simulate", "--map", "standard", "--L", "10", "--x", "0.3", "--y", "0.1", "--steps", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("simulate.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,x,y"));
    assert_eq!(lines.count(), 5);
}

#[test]
fn replay_reproduces_the_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let o = lab(&first, &["pushforward", "--L", "1e3", "--n", "2", "--mode", "sampled", "--samples", "16", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let again = dir.path().join("again");
    let o = Command::new(env!("CARGO_BIN_EXE_stdmap-lab"))
        .arg("--out")
        .arg(&again)
        .args(["replay", "--manifest"])
        .arg(first.join("manifest.json"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in ["pushforward.csv", "pushforward.json"] {
        assert_eq!(std::fs::read(first.join(name)).unwrap(), std::fs::read(again.join(name)).unwrap());
    }
}

#[test]
fn threads_come_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_stdmap-lab"))
        .env("STDMAP_LAB_THREADS", "1")
        .arg("--out")
        .arg(dir.path())
        .args(["strips", "--L", "1e3,1e4"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(json(&dir.path().join("manifest.json"))["threads"], 1);
}
