#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn kinfp() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_kinfp"));
    c.env_remove("KINFP_OUT");
    c
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

pub struct Case {
    pub name: &'static str,
    pub args: &'static [&'static str],
}

/// Small seeded runs of every subcommand with a frozen report.
pub const CASES: &[Case] = &[
    Case { name: "green-check-1d", args: &["green-check"] },
    Case { name: "green-check-2d", args: &["green-check", "--dim", "2"] },
    Case { name: "holder", args: &["holder"] },
    Case { name: "interp-check", args: &["interp-check"] },
    Case { name: "solve-linear", args: &["solve-linear"] },
    Case { name: "solve-toy", args: &["solve-toy"] },
    Case { name: "picard", args: &["picard"] },
    Case {
        name: "schauder-probe",
        args: &["schauder-probe", "--seed", "11", "--cases", "2", "--alpha", "0.5", "--levels", "2"],
    },
    Case { name: "gradient-probe", args: &["gradient-probe", "--seed", "3", "--cases", "2"] },
    Case { name: "decay-probe", args: &["decay-probe"] },
];

/// Runs `case` inside `dir` with outputs under `dir/out`; returns every output file.
pub fn run_case(case: &Case, dir: &Path, extra: &[&str]) -> (Output, BTreeMap<String, Vec<u8>>) {
    let config = golden_dir().join(case.name).join("config.json");
    let mut cmd = kinfp();
    cmd.current_dir(dir).args(case.args).args(["--no-timestamp", "--out-dir", "out"]).args(extra);
    if config.is_file() {
        cmd.arg("--config").arg(&config);
    }
    let out = cmd.output().expect("spawn kinfp");
    let mut files = BTreeMap::new();
    if let Ok(entries) = fs::read_dir(dir.join("out")) {
        for e in entries.flatten() {
            let name = e.file_name().to_string_lossy().into_owned();
            files.insert(name, fs::read(e.path()).expect("read output"));
        }
    }
    (out, files)
}

/// Compares the outputs of `case` with its frozen copies; `KINFP_BLESS=1`
/// rewrites them instead.
pub fn check_golden(case: &Case) -> Result<(), String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (out, files) = run_case(case, tmp.path(), &[]);
    if !out.status.success() {
        return Err(format!("{}: exit {:?}: {}", case.name, out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    let expected_dir = golden_dir().join(case.name).join("expected");
    if std::env::var_os("KINFP_BLESS").is_some() {
        let _ = fs::remove_dir_all(&expected_dir);
        fs::create_dir_all(&expected_dir).map_err(|e| e.to_string())?;
        for (name, bytes) in &files {
            fs::write(expected_dir.join(name), bytes).map_err(|e| e.to_string())?;
        }
        return Ok(());
    }
    let mut expected = BTreeMap::new();
    for e in fs::read_dir(&expected_dir).map_err(|e| format!("{}: {e}", expected_dir.display()))?.flatten() {
        expected.insert(e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).map_err(|e| e.to_string())?);
    }
    if expected.keys().ne(files.keys()) {
        return Err(format!("{}: files {:?}, expected {:?}", case.name, files.keys(), expected.keys()));
    }
    for (name, bytes) in &files {
        if expected[name] != *bytes {
            return Err(format!("{}: {name} differs from the golden copy", case.name));
        }
    }
    Ok(())
}

pub fn report_json(files: &BTreeMap<String, Vec<u8>>, name: &str) -> serde_json::Value {
    serde_json::from_slice(&files[name]).expect("report is JSON")
}
