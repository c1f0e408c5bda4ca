//! End-to-end checks of the `algext` binary: run, replay, suite, corpus.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_algext"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn corpus_list_names_entries() {
    let out = bin().args(["corpus", "list"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("parabola-curve"));
    assert!(text.contains("src-prod-surface-322"));
}

#[test]
fn run_weil_config_writes_report_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("weil.ini");
    write(
        &cfg,
        &format!(
            "[experiment]\nkind = weil-check\nrng_seed = 171\n\n[params]\nq = 101\nd = 3\ntrials = 50\n\n[output]\ndir = {}\n",
            dir.path().display()
        ),
    );
    let out = bin().args(["run"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "stdout: {}", String::from_utf8_lossy(&out.stdout));
    let report_path = dir.path().join("weil-report.json");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 50);
    assert_eq!(report["pass"], true);
    // pinned constants block is echoed
    assert!(report["pinned_constants"].as_array().unwrap().len() >= 4);
    assert!(dir.path().join("weil-rows.csv").exists());
}

#[test]
fn run_malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    write(&cfg, "[experiment]\nnot a key value pair\n");
    let out = bin().args(["run"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("w.ini");
    write(
        &cfg,
        &format!(
            "[experiment]\nkind = weil-check\nrng_seed = 9\n\n[params]\nq = 101\nd = 2\ntrials = 20\n\n[output]\ndir = {}\n",
            dir.path().display()
        ),
    );
    let run_once = || {
        let out = bin().args(["run"]).arg(&cfg).output().unwrap();
        assert!(out.status.success());
        std::fs::read_to_string(dir.path().join("w-rows.csv")).unwrap()
    };
    assert_eq!(run_once(), run_once());
}

#[test]
fn ext11_artifact_then_replay_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("e.ini");
    write(
        &cfg,
        &format!(
            "[experiment]\nkind = ext11\n\n[params]\nfield = 1009\nd = 2\nepsilon = 0.25\n\n[output]\ndir = {}\n",
            dir.path().display()
        ),
    );
    let out = bin().args(["run"]).arg(&cfg).output().unwrap();
    assert!(out.status.success());
    let artifact = dir.path().join("ext11-artifact.json");
    assert!(artifact.exists());
    let input = dir.path().join("inputs.txt");
    write(&input, "0\n1\n2\n1008\n500\n");
    let out_path: PathBuf = dir.path().join("replay1.txt");
    let st = bin()
        .args(["replay"])
        .arg(&artifact)
        .arg(&input)
        .arg("--output")
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(st.success());
    let out2_path = dir.path().join("replay2.txt");
    bin()
        .args(["replay"])
        .arg(&artifact)
        .arg(&input)
        .arg("--output")
        .arg(&out2_path)
        .status()
        .unwrap();
    // byte-identical across runs
    assert_eq!(
        std::fs::read(&out_path).unwrap(),
        std::fs::read(&out2_path).unwrap()
    );
    // truncated artifact is a version mismatch, exit 2
    let broken = dir.path().join("broken.json");
    let text = std::fs::read_to_string(&artifact).unwrap();
    write(&broken, &text[..text.len() / 2]);
    let out = bin().args(["replay"]).arg(&broken).arg(&input).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("artifact"));
}

#[test]
fn suite_smoke_passes() {
    let out = bin().args(["suite", "smoke"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "suite output:\n{text}");
    assert!(text.contains("suite smoke: PASS"));
    // the smoke subset runs these quick criteria
    for id in ["c01", "c02", "c03", "c04", "c05", "c13", "c14"] {
        assert!(text.contains(id), "missing {id} in:\n{text}");
    }
}

#[test]
fn unknown_suite_exits_two() {
    let out = bin().args(["suite", "bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
