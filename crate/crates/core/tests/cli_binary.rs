use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn mertens(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mertens"))
        .args(args)
        .env_remove("MERTENS_MAX_SIEVE")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("mertens-{}-{name}", std::process::id()))
}

#[test]
fn table_json_schema() {
    let out = mertens(&["table", "--n-max", "100", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let meta = &v["meta"];
    assert_eq!(meta["n_max"], 100);
    assert!(
        meta["segment_size"].is_u64() && meta["workers"].is_u64() && meta["version"].is_string()
    );
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let keys: Vec<&str> = rows[0]
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    for k in ["x", "pi", "s", "a", "s_minus_lnln", "extrapolated"] {
        assert!(keys.contains(&k), "{k}");
    }
    assert_eq!(rows[1]["x"], 100);
    assert_eq!(rows[1]["pi"], 25);
    let s = rows[0]["s"].as_f64().unwrap();
    assert!((s - (1.0 / 2.0 + 1.0 / 3.0 + 1.0 / 5.0 + 1.0 / 7.0)).abs() < 1e-15);
}

#[test]
fn table_text_and_csv() {
    let text = stdout(&mertens(&["table", "--checkpoints", "10,1e6"]));
    assert!(text.contains("1.176") && text.contains("2.887") && text.contains("78498"));
    let csv = stdout(&mertens(&[
        "table", "--n-max", "1e4", "--preset", "decades", "--format", "csv",
    ]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "x,pi,s,a,s_minus_lnln,extrapolated");
    assert_eq!(lines.len(), 5);
    assert!(lines[4].starts_with("10000,1229,"));
}

#[test]
fn json_bytes_do_not_depend_on_parallelism() {
    let base = stdout(&mertens(&[
        "table",
        "--n-max",
        "2e6",
        "--format",
        "json",
        "--workers",
        "1",
    ]));
    let rows = |s: &str| s[s.find("\"rows\"").unwrap()..].to_string();
    for (w, seg) in [("4", "16384"), ("16", "1048576")] {
        let other = stdout(&mertens(&[
            "table",
            "--n-max",
            "2e6",
            "--format",
            "json",
            "--workers",
            w,
            "--segment-size",
            seg,
        ]));
        assert_eq!(rows(&other), rows(&base));
    }
    let again = stdout(&mertens(&[
        "table",
        "--n-max",
        "2e6",
        "--format",
        "json",
        "--workers",
        "1",
    ]));
    assert_eq!(again, base);
}

#[test]
fn out_flag_writes_file() {
    let path = scratch("table.csv");
    let out = mertens(&[
        "table",
        "--n-max",
        "1000",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert!(written.starts_with("x,pi,"));
}

#[test]
fn extrapolate_prints_two_decimals() {
    let out = mertens(&["extrapolate", "--log10-x", "100"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "5.70\n");
    let v: Value = serde_json::from_str(&stdout(&mertens(&[
        "extrapolate",
        "--log10-x",
        "1e2",
        "--format",
        "json",
    ])))
    .unwrap();
    assert!((v["extrapolated"].as_f64().unwrap() - 5.7007).abs() < 1e-4);
}

#[test]
fn verify_and_estimate_b_succeed() {
    let out = mertens(&["verify", "--n-max", "100000", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v.is_object());

    let out = mertens(&["estimate-b", "--n-max", "1e6", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let line = stdout(&out).lines().nth(1).unwrap().to_string();
    let est: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
    assert!((est - 0.261497212847643).abs() < 2.7e-3);
}

#[test]
fn bench_reports_counts() {
    let out = mertens(&[
        "bench",
        "--n-max",
        "1e6",
        "--format",
        "csv",
        "--workers",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().nth(1).unwrap().starts_with("1000000,"));
    assert!(stdout(&out).contains(",78498,"));
}

#[test]
fn exit_codes() {
    assert_eq!(mertens(&["table", "--n-max", "-5"]).status.code(), Some(2));
    assert_eq!(
        mertens(&["table", "--checkpoints", "100,10"]).status.code(),
        Some(2)
    );
    assert_eq!(
        mertens(&["table", "--checkpoints", "10", "--preset", "decades"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        mertens(&["verify", "--n-max", "100"]).status.code(),
        Some(2)
    );
    assert_eq!(
        mertens(&["extrapolate", "--log10-x", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        mertens(&["table", "--n-max", "1e30"]).status.code(),
        Some(2)
    );
    assert_eq!(
        mertens(&["table", "--n-max", "1e13"]).status.code(),
        Some(3)
    );
    assert_eq!(mertens(&["bogus"]).status.code(), Some(2));
}

#[test]
fn env_cap_lowers_the_limit() {
    let out = Command::new(env!("CARGO_BIN_EXE_mertens"))
        .args(["table", "--n-max", "1e5"])
        .env("MERTENS_MAX_SIEVE", "1e4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_mertens"))
        .args(["table", "--n-max", "1e5"])
        .env("MERTENS_MAX_SIEVE", "nonsense")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
