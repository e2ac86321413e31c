#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn orfocus() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_orfocus"));
    c.env_remove("ORFOCUS_CONFIG");
    c
}

pub fn run(args: &[&str]) -> Output {
    orfocus().args(args).output().expect("binary runs")
}

pub fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "orfocus {args:?} failed with {:?}\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

/// Writes a synthetic session into `dir` and returns the directory.
pub fn synth(dir: &Path, extra: &[&str]) -> PathBuf {
    let mut args = vec!["synth", "--out-dir", p(dir)];
    args.extend_from_slice(extra);
    run_ok(&args);
    dir.to_path_buf()
}

/// Every file under `dir`, sorted by name, with contents.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .expect("output dir exists")
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

/// Annotation CSV with one start/stop pair per interval.
pub fn annotations_csv(behavior: &str, modifier: &str, intervals: &[(f64, f64)]) -> String {
    let mut rows: Vec<(f64, &str)> = Vec::new();
    for &(s, e) in intervals {
        rows.push((s, "start"));
        rows.push((e, "stop"));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = String::from("time,subject,behavior,modifier,kind\n");
    for (t, kind) in rows {
        out.push_str(&format!("{t},provider,{behavior},{modifier},{kind}\n"));
    }
    out
}
