// SPDX-License-Identifier: MIT OR Apache-2.0

//! The `eras` binary end to end: exit codes, reproducibility, threshold
//! files and figures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use eras_cli::report::{ResultDoc, ThresholdDoc};

fn eras(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eras")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn teams_csv() -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/lahman/Teams.csv");
    p.display().to_string()
}

/// Three series over 60 years with a common shift after 1929.
fn generic_csv(dir: &Path) -> String {
    let mut text = String::from("year,a,b,c\n");
    for (i, year) in (1900..1960).enumerate() {
        let level = if year > 1929 { 4.0 } else { 0.0 };
        let wiggle = |k: usize| ((i * 7 + k * 13) % 11) as f64 / 10.0 - 0.5;
        text.push_str(&format!(
            "{year},{},{},{}\n",
            level + wiggle(1),
            level + wiggle(2),
            -level + wiggle(3)
        ));
    }
    let path = dir.join("panel.csv");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn s(p: &Path) -> String {
    p.display().to_string()
}

#[test]
fn usage_errors_exit_2_before_reading_input() {
    let missing = "/nonexistent/input.csv";
    for args in [
        vec!["detect", "--input", missing, "--seed", "1", "--alpha", "1.5"],
        vec!["detect", "--input", missing, "--alpha", "0.1"],
        vec!["detect", "--input", missing, "--seed", "1", "--phi", "-0.1"],
        vec!["detect", "--input", missing, "--seed", "1", "--boot-reps", "20"],
        vec!["detect", "--input", missing, "--threshold", "fixed:-2"],
        vec!["detect", "--input", missing, "--threshold", "fixed:2", "--seed", "3"],
        vec!["detect", "--input", missing, "--recipe", "stat:nothing", "--seed", "1"],
        vec!["calibrate", "--input", missing, "--seed", "1", "--no-such-flag"],
        vec!["calibrate", "--input", missing, "--seed", "1", "--scales", "-1,-3"],
    ] {
        let out = eras(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn failure_classes_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = s(&dir.path().join("out"));
    let fixed = ["--threshold", "fixed:1", "--out", out_dir.as_str()];

    let missing = eras(&[&["detect", "--input", "/nonexistent/input.csv"][..], &fixed].concat());
    assert_eq!(code(&missing), 5);

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "year,a\n1900,1\n1901,x\n").unwrap();
    let parse = eras(&[&["detect", "--input", &s(&bad)][..], &fixed].concat());
    assert_eq!(code(&parse), 3);
    assert!(String::from_utf8_lossy(&parse.stderr).contains("ingest"));

    let teams = teams_csv();
    let unknown = eras(&[&["detect", "--input", &teams, "--recipe", "team:XYZ"][..], &fixed].concat());
    assert_eq!(code(&unknown), 3);

    let input = generic_csv(dir.path());
    let coarse = eras(&[&["detect", "--input", &input, "--scales", "7"][..], &fixed].concat());
    assert_eq!(code(&coarse), 4);
}

#[test]
fn detect_and_calibrate_are_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let input = generic_csv(dir.path());
    let mut docs = Vec::new();
    for (cmd, file) in [("detect", "result.json"), ("calibrate", "thresholds.json")] {
        let mut bytes = Vec::new();
        for run in 0..2 {
            let out = s(&dir.path().join(format!("{cmd}{run}")));
            let o = eras(&[cmd, "--input", &input, "--seed", "42", "--boot-reps", "120", "--out", &out]);
            assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
            bytes.push(fs::read(Path::new(&out).join(file)).unwrap());
        }
        assert_eq!(bytes[0], bytes[1], "{cmd}");
        docs.push(bytes.remove(0));
    }
    let result: ResultDoc = serde_json::from_slice(&docs[0]).unwrap();
    assert_eq!(result.panels[0].mean.labels(), vec![1929]);
    assert_eq!(result.panels[0].mean.seed, Some(42));
}

#[test]
fn threshold_file_reproduces_inline_calibration() {
    let dir = tempfile::tempdir().unwrap();
    let input = generic_csv(dir.path());
    let out = |name: &str| s(&dir.path().join(name));
    let common = ["--input", input.as_str(), "--seed", "5", "--boot-reps", "150"];
    assert_eq!(code(&eras(&[&["detect"][..], &common, &["--out", &out("inline")]].concat())), 0);
    assert_eq!(code(&eras(&[&["calibrate"][..], &common, &["--out", &out("cal")]].concat())), 0);
    let tfile = out("cal/thresholds.json");
    let reuse = eras(&["detect", "--input", &input, "--threshold-file", &tfile, "--out", &out("reuse")]);
    assert_eq!(code(&reuse), 0, "{}", String::from_utf8_lossy(&reuse.stderr));

    let read = |p: String| -> ResultDoc { serde_json::from_slice(&fs::read(p).unwrap()).unwrap() };
    let inline = read(out("inline/result.json"));
    let reused = read(out("reuse/result.json"));
    assert_eq!(inline.config, reused.config);
    assert_eq!(inline.panels, reused.panels);
    assert_eq!(reused.threshold_file.as_deref(), Some(tfile.as_str()));

    // a threshold file is tied to its settings and its data
    let other_phi = eras(&["detect", "--input", &input, "--phi", "0.3", "--threshold-file", &tfile]);
    assert_eq!(code(&other_phi), 2);
    let mut doc: ThresholdDoc = serde_json::from_slice(&fs::read(&tfile).unwrap()).unwrap();
    doc.panels[0].fingerprint = "0".repeat(64);
    let tampered = dir.path().join("tampered.json");
    fs::write(&tampered, serde_json::to_vec(&doc).unwrap()).unwrap();
    let o = eras(&["detect", "--input", &input, "--threshold-file", &s(&tampered), "--out", &out("x")]);
    assert_eq!(code(&o), 2);
    let with_seed = eras(&["detect", "--input", &input, "--threshold-file", &tfile, "--seed", "5"]);
    assert_eq!(code(&with_seed), 2);
}

#[test]
fn plots_are_deterministic_and_mark_change_points() {
    let dir = tempfile::tempdir().unwrap();
    let input = generic_csv(dir.path());
    let out = s(&dir.path().join("run"));
    let o = eras(&["detect", "--input", &input, "--threshold", "fixed:1", "--out", &out, "--plots"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let first = fs::read_to_string(dir.path().join("run/generic.svg")).unwrap();
    // one solid marker per series for the 1929 shift
    assert_eq!(first.matches("stroke=\"#b22222\"").count(), 3);

    let again = s(&dir.path().join("again"));
    let result = s(&dir.path().join("run/result.json"));
    assert_eq!(code(&eras(&["plot", &result, "--out", &again])), 0);
    assert_eq!(fs::read_to_string(dir.path().join("again/generic.svg")).unwrap(), first);

    // a result with no change points draws no markers
    let mut doc: ResultDoc = serde_json::from_str(&fs::read_to_string(&result).unwrap()).unwrap();
    doc.panels[0].mean.change_points.clear();
    doc.panels[0].variance = None;
    let empty = dir.path().join("empty.json");
    fs::write(&empty, serde_json::to_vec(&doc).unwrap()).unwrap();
    assert_eq!(code(&eras(&["plot", &s(&empty), "--out", &s(&dir.path().join("e"))])), 0);
    let svg = fs::read_to_string(dir.path().join("e/generic.svg")).unwrap();
    assert!(!svg.contains("<line"));

    let junk = dir.path().join("junk.json");
    fs::write(&junk, "{\"format\": \"eras-result/1\"}").unwrap();
    assert_eq!(code(&eras(&["plot", &s(&junk)])), 3);
    doc.panels[0].panel = eras::Panel::from_rows(vec![vec![0.0, 1.0, 2.0]]).unwrap();
    fs::write(&junk, serde_json::to_vec(&doc).unwrap()).unwrap();
    assert_eq!(code(&eras(&["plot", &s(&junk)])), 3);
}

#[test]
fn team_runs_draw_a_franchise_timeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(&dir.path().join("twins"));
    let o = eras(&[
        "detect", "--input", &teams_csv(), "--recipe", "team:min", "--seed", "2021",
        "--boot-reps", "100", "--out", &out, "--plots",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("team-MIN"));
    let timeline = fs::read_to_string(dir.path().join("twins/franchise-timeline.svg")).unwrap();
    assert!(timeline.contains("Minnesota Twins"));
    assert!(dir.path().join("twins/team-MIN.svg").exists());
}
