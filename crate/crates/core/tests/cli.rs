use std::path::Path;
use std::process::{Command, Output};

use gaborcs::harness::io::{manifest_path, read_csv, read_json, Manifest};
use gaborcs::harness::{PhaseRow, TrialRecord};

fn gaborcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaborcs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn alltop_coherence_is_printed() {
    let o = gaborcs(&["coherence", "--n", "5", "--window", "alltop"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "0.4472135955");
}

#[test]
fn recovery_constants_preset() {
    for preset in ["remark22", "recovery-constants"] {
        let o = gaborcs(&["bounds", "--preset", preset]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        let value = |key: &str| -> f64 {
            text.lines()
                .find_map(|l| l.strip_prefix(key))
                .and_then(|v| v.trim().parse().ok())
                .unwrap()
        };
        assert!((value("C1") - 273.5).abs() <= 0.5);
        assert!((value("C2") - 64.1).abs() <= 0.5);
        assert!((value("C3") - 8.35).abs() <= 0.1);
    }
}

#[test]
fn phase_csv_shape_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pt.csv");
    let o = gaborcs(&[
        "phase", "--n", "16", "--window", "steinhaus", "--s-min", "1", "--s-max", "16",
        "--trials", "4", "--seed", "42", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,window,S,trials,successes,rate,wilson_lo,wilson_hi,seed"
    );
    assert_eq!(lines.count(), 16);
    let rows: Vec<PhaseRow> = read_csv(&out).unwrap();
    assert_eq!(rows.iter().map(|r| r.s).collect::<Vec<_>>(), (1..=16).collect::<Vec<_>>());
    assert!(rows.iter().all(|r| r.seed == 42 && r.trials == 4));

    let manifest: Manifest = read_json(&manifest_path(&out)).unwrap();
    assert_eq!(manifest.command, "phase");
    assert_eq!(manifest.seed, 42);
    assert_eq!(manifest.version, env!("CARGO_PKG_VERSION"));
    assert!(manifest.duration_s >= 0.0 && manifest.started_at > 0.0);
    assert_eq!(manifest.params["command"]["sparsity_grid"].as_array().unwrap().len(), 16);
}

#[test]
fn phase_output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = gaborcs(&[
            "phase", "--n", "12", "--s-min", "2", "--s-max", "6", "--s-step", "2",
            "--trials", "5", "--seed", "9", "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn random_phase_records_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rp.csv");
    let o = gaborcs(&[
        "random-phase", "--n", "16", "--s", "2", "--trials", "6", "--seed", "3",
        "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("vacuous"));
    let records: Vec<TrialRecord> = read_csv(&csv).unwrap();
    assert_eq!(records.len(), 6);
    assert!(records.iter().enumerate().all(|(i, r)| r.trial_index == i as u64 && r.s == 2));

    let json = dir.path().join("rp.json");
    let o = gaborcs(&[
        "random-phase", "--n", "16", "--s", "2", "--trials", "6", "--seed", "3",
        "--format", "json", "--out", json.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let value: serde_json::Value = read_json(&json).unwrap();
    assert_eq!(value["records"].as_array().unwrap().len(), 6);
    assert_eq!(value["S"], 2);
}

#[test]
fn other_subcommands_run() {
    let cases: &[&[&str]] = &[
        &["window", "--n", "4", "--seed", "1"],
        &["gram", "--n", "16", "--support", "0:0,1:2,5:7"],
        &["recover", "--n", "16", "--s", "2", "--seed", "4"],
        &["identify", "--n", "16", "--s", "2", "--trials", "3"],
        &["conditioning", "--n", "64", "--s-min", "2", "--s-max", "3", "--trials", "10"],
        &["bounds", "--n", "256", "--s-min", "1", "--s-max", "2", "--m-max", "10"],
    ];
    for args in cases {
        let o = gaborcs(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!stdout(&o).is_empty(), "{args:?}");
    }
    let o = gaborcs(&["gram", "--n", "16", "--support", "0:0,1:2,5:7"]);
    let lambda_min: f64 = stdout(&o)
        .lines()
        .find_map(|l| l.strip_prefix("lambda_min "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(lambda_min > 0.0 && lambda_min <= 1.0);
}

#[test]
fn exit_codes() {
    let unknown = gaborcs(&["coherence", "--frobnicate"]);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("Usage"));

    assert_eq!(gaborcs(&["coherence", "--n", "9", "--window", "alltop"]).status.code(), Some(1));
    assert_eq!(gaborcs(&["random-phase", "--n", "15", "--trials", "1"]).status.code(), Some(1));
    assert_eq!(
        gaborcs(&["random-phase", "--n", "16", "--sigma", "8", "--trials", "1"]).status.code(),
        Some(1)
    );

    let missing = Path::new("/nonexistent-directory/out.csv");
    let o = gaborcs(&["window", "--n", "4", "--out", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonexistent-directory"));
}

#[test]
fn thread_cap_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_gaborcs"))
            .args(["phase", "--n", "12", "--s-min", "3", "--s-max", "4", "--trials", "4"])
            .args(["--out", out.to_str().unwrap()])
            .env("GABORCS_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        std::fs::read(out).unwrap()
    };
    assert_eq!(run("1", "one.csv"), run("3", "three.csv"));
    let bad = Command::new(env!("CARGO_BIN_EXE_gaborcs"))
        .args(["coherence", "--n", "5", "--window", "alltop"])
        .env("GABORCS_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
