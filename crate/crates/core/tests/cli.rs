use std::path::PathBuf;
use std::process::{Command, Output};

fn longstep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_longstep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("longstep-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn row_field(csv: &str, row: usize, col: &str) -> String {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == col).unwrap();
    lines
        .nth(row)
        .unwrap()
        .split(',')
        .nth(idx)
        .unwrap()
        .to_string()
}

#[test]
fn scan_file_schedule() {
    let dir = scratch("scan");
    let path = dir.join("steps.json");
    std::fs::write(&path, r#"{"name": "steps", "values": [1, 1, 1, 1, 10]}"#).unwrap();
    let out = longstep(&["scan", "--schedule", &format!("file:{}", path.display())]);
    assert!(out.status.success());
    let csv = stdout(&out);
    assert!(csv.starts_with("T,eta,sigma,ratio,c_T,long_step,certifiable\n"));
    assert_eq!(row_field(&csv, 4, "c_T").parse::<f64>().unwrap(), 0.1953125);
    assert_eq!(row_field(&csv, 4, "certifiable"), "true");
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn emitted_silver_schedule_reloads_to_same_scan() {
    let dir = scratch("roundtrip");
    for k in [1, 4, 9] {
        let path = dir.join(format!("silver{k}.json"));
        let emitted = longstep(&[
            "schedule",
            "--silver",
            &k.to_string(),
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(emitted.status.success());
        let from_file = longstep(&["scan", "--schedule", &format!("file:{}", path.display())]);
        let direct = longstep(&["scan", "--schedule", &format!("silver:{k}")]);
        assert!(from_file.status.success() && direct.status.success());
        assert_eq!(from_file.stdout, direct.stdout, "k = {k}");
    }
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn certify_emits_json_certificate() {
    let out = longstep(&["certify", "--schedule", "silver:1", "--T", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["kind"], "theorem2");
    assert_eq!(v["T"], 1);
    assert!((v["predicted_bound"].as_f64().unwrap() - 0.045_534_586_912_079_61).abs() < 1e-12);
    assert!((v["chain"]["c_T"].as_f64().unwrap() - 0.0625).abs() < 1e-12);
    assert_eq!(v["instance"]["objective"]["kind"], "huber");
    assert_eq!(v["instance"]["L"].as_f64(), Some(1.0));
}

#[test]
fn certify_rescales_with_l() {
    let base = longstep(&["certify", "--schedule", "list:1,1,1,1,10", "--T", "4"]);
    let scaled = longstep(&[
        "certify",
        "--schedule",
        "list:1,1,1,1,10",
        "--T",
        "4",
        "--L",
        "4",
    ]);
    let b: serde_json::Value = serde_json::from_str(&stdout(&base)).unwrap();
    let s: serde_json::Value = serde_json::from_str(&stdout(&scaled)).unwrap();
    assert_eq!(
        s["predicted_bound"].as_f64().unwrap(),
        4.0 * b["predicted_bound"].as_f64().unwrap()
    );
    assert_eq!(
        s["simulated_gap"].as_f64().unwrap(),
        4.0 * b["simulated_gap"].as_f64().unwrap()
    );
    assert_eq!(s["instance"]["objective"]["scale"].as_f64(), Some(4.0));
    assert_eq!(s["instance"]["x0"], b["instance"]["x0"]);
}

#[test]
fn not_certifiable_exits_one() {
    let out = longstep(&["certify", "--schedule", "const:0.5,10", "--T", "5"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("not certifiable: eta_T < 2/L"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn theorem1_not_applicable_and_passing() {
    let out = longstep(&["theorem1", "--schedule", "list:1", "--T", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = longstep(&["theorem1", "--schedule", "list:1,1,1,1", "--T", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["kind"], "theorem1");
    assert!(v["chain"]["a"].is_null());
}

#[test]
fn refute_silver_table() {
    let out = longstep(&["refute-silver", "--k", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = stdout(&out);
    assert_eq!(csv.lines().count(), 6);
    assert!((row_field(&csv, 0, "c_T").parse::<f64>().unwrap() - 0.0625).abs() < 1e-12);
    assert!((row_field(&csv, 1, "c_T").parse::<f64>().unwrap() - 0.015625).abs() < 1e-12);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn growth_report_csv() {
    let out = longstep(&[
        "growth-report",
        "--schedule",
        "silver:4",
        "--alpha",
        "1.2716",
    ]);
    assert!(out.status.success());
    let csv = stdout(&out);
    let t7 = csv.lines().find(|l| l.starts_with("7,")).unwrap();
    let value: f64 = t7.split(',').nth(3).unwrap().parse().unwrap();
    assert!((value - 1.800_209_067_693_135_6).abs() < 1e-12);

    let empty = longstep(&[
        "growth-report",
        "--schedule",
        "const:0.5,20",
        "--alpha",
        "1.5",
    ]);
    assert!(empty.status.success());
    assert_eq!(stdout(&empty), "T,eta,sigma,value,record_high\n");
}

#[test]
fn run_reports_divergence() {
    let out = longstep(&[
        "run",
        "--schedule",
        "const:3,3000",
        "--objective",
        "quad:1",
        "--x0",
        "1",
        "--T",
        "3000",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("diverged"), "{err}");
}

#[test]
fn usage_errors() {
    for args in [
        vec!["frobnicate"],
        vec!["scan"],
        vec!["scan", "--schedule", "wobble:1"],
        vec!["scan", "--schedule", "list:1,-2"],
        vec![
            "run",
            "--schedule",
            "silver:2",
            "--objective",
            "quad:0",
            "--x0",
            "1",
            "--T",
            "3",
        ],
        vec!["certify", "--schedule", "list:1,3", "--T", "4"],
    ] {
        let out = longstep(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
    }
}
