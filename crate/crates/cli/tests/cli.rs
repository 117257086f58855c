mod common;

use std::fs;
use std::path::Path;
use std::process::Output;

use common::{golden_dir, kinfp, report_json, run_case, CASES};
use serde_json::{json, Value};

fn case(name: &str) -> &'static common::Case {
    CASES.iter().find(|c| c.name == name).unwrap()
}

fn error_of(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let v: Value = serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("not JSON ({e}): {text}"));
    v["error"].clone()
}

fn write_config(dir: &Path, value: Value) -> std::path::PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, serde_json::to_vec(&value).unwrap()).unwrap();
    p
}

#[test]
fn unknown_flag_is_a_validation_error_naming_the_flag() {
    let out = kinfp().args(["green-check", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let e = error_of(&out);
    assert_eq!(e["kind"], "validation");
    assert_eq!(e["argument"], "--bogus");
}

#[test]
fn missing_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = kinfp().current_dir(tmp.path()).args(["holder", "--config", "missing.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(error_of(&out)["message"].as_str().unwrap().contains("config not found"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), json!({"foo": 1}));
    let out = kinfp().current_dir(tmp.path()).arg("picard").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(error_of(&out)["message"].as_str().unwrap().contains("foo"));
}

#[test]
fn unsupported_dimension_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = kinfp().current_dir(tmp.path()).args(["green-check", "--dim", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = kinfp().current_dir(tmp.path()).args(["decay-probe", "--dim", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_threads_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = kinfp().current_dir(tmp.path()).args(["green-check", "--threads", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), json!({"orders": [[0, 1, 0]], "caloric": {"a1": 0.0, "a2": 0.0}}));
    let out = kinfp().current_dir(tmp.path()).arg("decay-probe").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(error_of(&out)["kind"], "numerical");
}

#[test]
fn green_check_masses_in_one_dimension() {
    let tmp = tempfile::tempdir().unwrap();
    let (out, files) = run_case(case("green-check-1d"), tmp.path(), &[]);
    assert!(out.status.success());
    let r = report_json(&files, "green-check.json");
    for m in r["result"]["mass_errors"].as_array().unwrap() {
        assert!(m.as_f64().unwrap() < 1e-8);
    }
    assert_eq!(r["result"]["pass"], true);
    // stdout carries the same report
    assert_eq!(out.stdout, files["green-check.json"]);
}

#[test]
fn reports_are_reproducible_and_thread_independent() {
    for name in ["schauder-probe", "solve-toy", "gradient-probe"] {
        let runs: Vec<_> = [["--threads", "1"], ["--threads", "2"], ["--threads", "1"]]
            .iter()
            .map(|t| {
                let tmp = tempfile::tempdir().unwrap();
                let (out, files) = run_case(case(name), tmp.path(), t);
                assert!(out.status.success(), "{name}");
                files
            })
            .collect();
        assert_eq!(runs[0], runs[1], "{name}: threads changed the output");
        assert_eq!(runs[0], runs[2], "{name}: repeated run differs");
    }
}

#[test]
fn seed_changes_the_probe() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |seed: &str| {
        let out = kinfp()
            .current_dir(tmp.path())
            .args(["schauder-probe", "--cases", "1", "--levels", "1", "--no-timestamp", "--seed", seed])
            .output()
            .unwrap();
        assert!(out.status.success());
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        v["result"]["max_ratio"].as_f64().unwrap()
    };
    assert_ne!(run("1"), run("2"));
}

#[test]
fn timestamp_is_optional() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["schauder-probe", "--cases", "1", "--levels", "1"];
    let out = kinfp().current_dir(tmp.path()).args(args).output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["created_at"].as_u64().is_some());
    let out = kinfp().current_dir(tmp.path()).args(args).arg("--no-timestamp").output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.get("created_at").is_none());
}

#[test]
fn output_directory_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), json!({"out_dir": "from-file", "cases": 1, "levels": 1}));
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = kinfp();
        cmd.current_dir(tmp.path()).arg("schauder-probe").arg("--config").arg(&cfg);
        if let Some(e) = env {
            cmd.env("KINFP_OUT", e);
        }
        if let Some(f) = flag {
            cmd.args(["--out-dir", f]);
        }
        assert!(cmd.output().unwrap().status.success());
    };
    run(None, None);
    assert!(tmp.path().join("from-file/schauder-probe.json").is_file());
    run(Some("from-env"), None);
    assert!(tmp.path().join("from-env/schauder-probe.json").is_file());
    run(Some("from-env"), Some("from-flag"));
    assert!(tmp.path().join("from-flag/schauder-probe.json").is_file());
}

#[test]
fn report_embeds_the_resolved_config() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, files) = run_case(case("picard"), tmp.path(), &[]);
    let cfg = &report_json(&files, "picard.json")["config"];
    assert_eq!(cfg["dim"], 1);
    assert_eq!(cfg["n_max"], 20);
    assert_eq!(cfg["tol"], 1e-10);
    assert_eq!(cfg["grid"]["nx"], 16);
    assert!(cfg["initial"].is_string());
}

#[test]
fn solver_output_feeds_other_subcommands() {
    let tmp = tempfile::tempdir().unwrap();
    let (out, _) = run_case(case("solve-linear"), tmp.path(), &[]);
    assert!(out.status.success());
    let field = tmp.path().join("out/solve-linear.final.kfp");
    assert!(field.is_file());

    let cfg = write_config(
        tmp.path(),
        json!({
            "grid": {"nx": 16, "nv": 33, "v_max": 6.0},
            "dt": 0.01,
            "t_final": 0.1,
            "initial": {"file": field},
            "diagnostics": {"envelope": false}
        }),
    );
    let out = kinfp().current_dir(tmp.path()).arg("solve-toy").arg("--config").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // a mismatched grid is a validation error
    let cfg = write_config(tmp.path(), json!({"grid": {"nx": 8}, "initial": {"file": field}}));
    let out = kinfp().current_dir(tmp.path()).arg("solve-toy").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn golden_configs_exist_for_every_case() {
    for c in CASES {
        let dir = golden_dir().join(c.name);
        assert!(dir.join("expected").is_dir(), "{}", c.name);
    }
}
