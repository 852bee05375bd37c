//! Exit codes, error messages and small end-to-end runs of the binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hdenc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdenc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const TINY_SPEC: &str = r#"{
  "num_channels": 4,
  "sample_rate": 128.0,
  "num_seizure_files": 2,
  "seizure_file_duration_s": 100.0,
  "num_free_files": 1,
  "free_file_duration_s": 150.0,
  "informative_channels": [1]
}"#;

#[test]
fn cost_table_matches_reference_counts() {
    let o = hdenc(&["cost"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    for bits in ["741000", "6878000", "1083000", "38000"] {
        assert!(out.contains(bits), "missing {bits} in\n{out}");
    }
    assert!(out.contains("feat-append <= feat-x-val <= feat-x-ch-x-val <= ch-x-feat-x-val <= chfeatcomb-x-val"));
}

#[test]
fn cost_writes_files_when_asked() {
    let dir = tempfile::tempdir().unwrap();
    let o = hdenc(&["cost", "--dim", "10000", "--out", p(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("cost.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run-manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["hd"]["dim"], 10000);
    assert_eq!(manifest["overrides"][0]["key"], "/hd/dim");
}

#[test]
fn malformed_spec_is_a_usage_error_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, "{\n  \"num_channels\": 4,\n  \"seed\": oops\n}\n").unwrap();
    let o = hdenc(&["synth", "--spec", p(&spec), "--out", p(&dir.path().join("out"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn unknown_spec_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"num_chanels": 4}"#).unwrap();
    let o = hdenc(&["synth", "--spec", p(&spec), "--out", p(&dir.path().join("out"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("num_chanels"), "{}", stderr(&o));
}

#[test]
fn null_spec_needs_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, r#"{"effects": []}"#).unwrap();
    let o = hdenc(&["synth", "--spec", p(&spec), "--out", p(&dir.path().join("out"))]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("allow_null"), "{}", stderr(&o));
}

#[test]
fn missing_inputs_and_bad_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let missing = dir.path().join("nope.json");
    let o = hdenc(&["features", "--dataset", p(&missing), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = hdenc(&["eval", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = hdenc(&["eval", "--scheme", "feat-x-nothing", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("feat-x-ch-x-val"), "{}", stderr(&o));
    let o = hdenc(&["train", "--features", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let o = hdenc(&["synth", "--jobs", "0", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn corrupt_signal_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, TINY_SPEC).unwrap();
    let data = dir.path().join("data");
    let o = hdenc(&["synth", "--spec", p(&spec), "--out", p(&data)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let victim = data.join("s01").join("s01_00.bin");
    let bytes = fs::read(&victim).unwrap();
    fs::write(&victim, &bytes[..bytes.len() / 2]).unwrap();
    let o = hdenc(&["features", "--dataset", p(&data.join("manifest.json")), "--out", p(&dir.path().join("f"))]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn small_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, TINY_SPEC).unwrap();
    let data = dir.path().join("data");
    let feats = dir.path().join("features");
    let o = hdenc(&["synth", "--spec", p(&spec), "--subjects", "2", "--out", p(&data)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = hdenc(&["features", "--dataset", p(&data.join("manifest.json")), "--ratio", "3", "--out", p(&feats)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("gamma"), "attenuation warning expected: {}", stderr(&o));

    let train = dir.path().join("train");
    let o = hdenc(&["train", "--features", p(&feats), "--dim", "1000", "--out", p(&train)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for id in ["s01", "s02"] {
        assert!(train.join("models").join(format!("{id}.hdmd")).exists());
        assert!(train.join("models").join(format!("{id}.json")).exists());
    }

    let eval = dir.path().join("eval");
    let o = hdenc(&[
        "eval", "--features", p(&feats), "--dim", "1000", "--subject", "s02", "--mode", "onlinehd", "--out", p(&eval),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(eval.join("eval.json")).unwrap()).unwrap();
    assert_eq!(report["subjects"].as_array().unwrap().len(), 1);
    assert_eq!(report["subjects"][0]["subject"], "s02");
    let f1de = report["mean_postprocessed"]["f1de_gmean"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&f1de));

    let sel = dir.path().join("select");
    let o = hdenc(&[
        "select", "--features", p(&feats), "--dim", "1900", "--subject", "s01", "--strategy", "greedy", "--svg", "--out",
        p(&sel),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fold = sel.join("s01").join("fold_00");
    for f in ["per_feature.csv", "correlation.csv", "ordering_greedy.csv", "curve_greedy.csv", "curves.svg"] {
        assert!(fold.join(f).exists(), "missing {f}");
    }
    assert!(!fold.join("ordering_perf.csv").exists());
    let per_feature = fs::read_to_string(fold.join("per_feature.csv")).unwrap();
    assert_eq!(per_feature.lines().count(), 20);
}

#[test]
fn unknown_subject_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, TINY_SPEC).unwrap();
    let data = dir.path().join("data");
    let feats = dir.path().join("features");
    assert!(hdenc(&["synth", "--spec", p(&spec), "--out", p(&data)]).status.success());
    assert!(hdenc(&["features", "--dataset", p(&data.join("manifest.json")), "--out", p(&feats)])
        .status
        .success());
    let o = hdenc(&["eval", "--features", p(&feats), "--subject", "s09", "--out", p(&dir.path().join("e"))]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("s09"), "{}", stderr(&o));
}
