use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn taxel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_taxel")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = taxel(args);
    assert!(out.status.success(), "{args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn error_json(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let last = stderr.lines().last().expect("stderr has a line");
    serde_json::from_str(last).unwrap_or_else(|_| panic!("not JSON: {last}"))
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn sha256(path: &Path) -> String {
    use sha2::Digest;
    hex::encode(sha2::Sha256::digest(std::fs::read(path).unwrap()))
}

fn small_dataset(dir: &Path) {
    let d = dir.to_str().unwrap();
    ok(&["synth", "--seed", "3", "--out", d, "--train-participants", "2", "--test-participants", "1"]);
}

#[test]
fn synth_train_eval_manifests_chain_by_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, model, report) = (tmp.path().join("data"), tmp.path().join("model"), tmp.path().join("report"));
    small_dataset(&data);
    ok(&["train", "--data", data.to_str().unwrap(), "--out", model.to_str().unwrap(), "--seed", "0", "--epochs", "5"]);
    ok(&["eval", "--data", data.to_str().unwrap(), "--model", model.to_str().unwrap(), "--out", report.to_str().unwrap()]);

    let synth_hash = sha256(&data.join("manifest.json"));
    let train_hash = sha256(&model.join("manifest.json"));
    let train = read_json(&model.join("manifest.json"));
    let eval = read_json(&report.join("manifest.json"));
    assert_eq!(train["parents"], serde_json::json!([synth_hash]));
    assert_eq!(eval["parents"], serde_json::json!([synth_hash, train_hash]));

    // Every recorded output hash matches the file on disk.
    for (dir, m) in [(&model, &train), (&report, &eval)] {
        for a in m["outputs"].as_array().unwrap() {
            assert_eq!(a["sha256"].as_str().unwrap(), sha256(&dir.join(a["file"].as_str().unwrap())));
        }
    }
    let r = read_json(&report.join("report.json"));
    assert_eq!(r["total"], 30);
    assert!(std::fs::read_to_string(report.join("confusion.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_dataset(&data);
    let mut digests = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        ok(&["train", "--data", data.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "4", "--model", "rf", "--trees", "5"]);
        digests.push((sha256(&out.join("model.json")), sha256(&out.join("manifest.json"))));
    }
    assert_eq!(digests[0], digests[1]);
}

#[test]
fn kind_mismatch_has_its_own_exit_code() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, model) = (tmp.path().join("data"), tmp.path().join("model"));
    small_dataset(&data);
    ok(&["train", "--data", data.to_str().unwrap(), "--out", model.to_str().unwrap(), "--seed", "0", "--model", "rf", "--trees", "3"]);
    let out = taxel(&[
        "eval",
        "--data",
        data.to_str().unwrap(),
        "--model",
        model.to_str().unwrap(),
        "--out",
        tmp.path().join("r").to_str().unwrap(),
        "--feature",
        "taxel-mean",
    ]);
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(error_json(&out)["error"]["kind"], "kind_mismatch");
}

#[test]
fn ablate_reports_five_features() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, out) = (tmp.path().join("data"), tmp.path().join("ablate"));
    small_dataset(&data);
    ok(&["ablate", "--data", data.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "0", "--epochs", "3"]);
    let table = read_json(&out.join("ablation.json"));
    let labels: Vec<&str> = table["rows"].as_array().unwrap().iter().map(|r| r["label"].as_str().unwrap()).collect();
    assert_eq!(labels, ["Ours", "F1", "F2", "F3", "F4"]);
}

#[test]
fn characterize_writes_curve_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("char");
    let text = ok(&["characterize", "--seed", "1", "--out", out.to_str().unwrap(), "--repetitions", "2", "--taxels", "0,40"]);
    assert!(text.contains("upper") && text.contains("lower"));
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["taxels"].as_array().unwrap().len(), 2);
    let csv = std::fs::read_to_string(out.join("curve.csv")).unwrap();
    assert!(csv.lines().count() > 10);
}

#[test]
fn usage_and_io_errors_are_distinct() {
    let help = taxel(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    let text = String::from_utf8_lossy(&help.stdout);
    for needle in ["10 counts", "150 frames", "3 frames", "50 Hz", "0.00025", "60 trees"] {
        assert!(text.contains(needle), "help lacks {needle}");
    }

    let unknown = taxel(&["train", "--bogus"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert_eq!(error_json(&unknown)["error"]["kind"], "usage");

    let tmp = tempfile::tempdir().unwrap();
    let missing = taxel(&["train", "--data", tmp.path().join("nope").to_str().unwrap(), "--out", "x", "--seed", "1"]);
    assert_eq!(missing.status.code(), Some(4));
    assert!(!Path::new("x").exists(), "nothing is written before inputs are validated");

    let unseeded = taxel(&["synth", "--out", tmp.path().join("d").to_str().unwrap()]);
    assert_eq!(unseeded.status.code(), Some(3));

    let bad_config = tmp.path().join("bad.json");
    std::fs::write(&bad_config, r#"{"pipeline": {"target_frames": 0}}"#).unwrap();
    let out = taxel(&["synth", "--seed", "1", "--out", tmp.path().join("d").to_str().unwrap(), "--config", bad_config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "synth ignores the pipeline section");
    let out = taxel(&["ablate", "--data", tmp.path().join("d").to_str().unwrap(), "--out", "y", "--seed", "1", "--config", bad_config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_file_seed_and_flag_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"seed": 3, "synth": {"n_train_participants": 2, "n_test_participants": 1}}"#).unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&["synth", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    small_dataset(&b);
    assert_eq!(sha256(&a.join("dataset.jsonl")), sha256(&b.join("dataset.jsonl")));

    let c = tmp.path().join("c");
    ok(&["synth", "--config", cfg.to_str().unwrap(), "--seed", "4", "--out", c.to_str().unwrap()]);
    assert_ne!(sha256(&a.join("dataset.jsonl")), sha256(&c.join("dataset.jsonl")));
    assert_eq!(read_json(&c.join("manifest.json"))["seed"], 4);
}

#[test]
fn serve_and_listen_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, model, events) = (tmp.path().join("data"), tmp.path().join("model"), tmp.path().join("events"));
    small_dataset(&data);
    ok(&["train", "--data", data.to_str().unwrap(), "--out", model.to_str().unwrap(), "--seed", "0", "--model", "rf", "--trees", "10"]);

    let mut server = Command::new(env!("CARGO_BIN_EXE_taxel"))
        .args(["serve", "--data", data.to_str().unwrap(), "--addr", "127.0.0.1:0", "--rate", "5000", "--gap", "1", "--max-connections", "1"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(server.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on ").expect("address line").to_string();

    let stdout = ok(&["listen", "--addr", &addr, "--model", model.to_str().unwrap(), "--out", events.to_str().unwrap(), "--max-reconnects", "0"]);
    assert!(server.wait().unwrap().success());
    let lines: Vec<Value> = stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 30);
    assert_eq!(std::fs::read_to_string(events.join("events.jsonl")).unwrap(), stdout);
    assert_eq!(read_json(&events.join("stats.json"))["events"], 30);
}
