//! CLI-level behavior: artifact structure, exit codes, and expectation
//! handling, driven through the built binary.

use std::path::PathBuf;
use std::process::Command;

fn run(config: &str, extra: &[&str]) -> (i32, String, String) {
    let dir = std::env::temp_dir().join(format!("warpcd-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join(format!("cfg-{:x}.json", warpcd_core::report::config_hash(config)));
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join(format!("{}.csv", warpcd_core::report::config_hash(config)));
    let result = Command::new(env!("CARGO_BIN_EXE_warpcd"))
        .args(["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .args(extra)
        .output()
        .unwrap();
    let csv = std::fs::read_to_string(&out).unwrap_or_default();
    (
        result.status.code().unwrap_or(-1),
        csv,
        String::from_utf8_lossy(&result.stderr).into_owned(),
    )
}

const SQUARE_FK: &str = r#"{
    "command": "fk-check",
    "space": {
        "base": {"kind": "interval", "a": 0.0, "b": 1.0},
        "fiber": {"kind": "circle", "radius": 1.0},
        "warping": {"kind": "square"},
        "exponent": 1.0
    },
    "parameters": {"k": 0.0}
}"#;

#[test]
fn fk_check_reports_failure_with_margin() {
    let (code, csv, _) = run(SQUARE_FK, &["--seed", "1", "--reproducible"]);
    assert_eq!(code, 0, "report-style run exits clean");
    assert!(csv.contains("FAIL"));
    // hessian margin of the square warping is exactly 2
    assert!(csv.contains("2.000000000000e0"), "csv:\n{csv}");
}

#[test]
fn stated_expectations_drive_exit_codes() {
    let expecting_pass = SQUARE_FK.replace(r#""k": 0.0"#, r#""k": 0.0, "expect": "pass""#);
    let (code, _, _) = run(&expecting_pass, &["--seed", "1"]);
    assert_eq!(code, 3, "failed expectation exits 3");

    let expecting_violation =
        SQUARE_FK.replace(r#""k": 0.0"#, r#""k": 0.0, "expect": "violation""#);
    let (code, _, _) = run(&expecting_violation, &["--seed", "1"]);
    assert_eq!(code, 0, "confirmed violation exits 0");
}

#[test]
fn invalid_config_exits_one() {
    let dir = std::env::temp_dir();
    let cfg = dir.join("warpcd-broken.json");
    std::fs::write(&cfg, "{ this is not json").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_warpcd"))
        .args(["--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    let missing = Command::new(env!("CARGO_BIN_EXE_warpcd"))
        .args(["--config", "/nonexistent/warpcd.json"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn provenance_header_records_defaults_and_hash() {
    let (code, csv, _) = run(SQUARE_FK, &["--seed", "9", "--reproducible"]);
    assert_eq!(code, 0);
    assert!(csv.lines().next().unwrap().starts_with("# warpcd "));
    assert!(csv.contains("# config-hash "));
    assert!(csv.contains("# seed 9"));
    assert!(csv.contains("[default]"));
    assert!(!csv.contains("# timestamp"), "reproducible runs drop timestamps");
}

#[test]
fn geodesic_dump_has_speed_columns() {
    let config = r#"{
        "command": "geodesic",
        "space": {
            "base": {"kind": "interval", "a": 0.0, "b": 3.141592653589793},
            "fiber": {"kind": "circle", "radius": 1.0},
            "warping": {"kind": "sin"},
            "exponent": 1.0
        },
        "parameters": {
            "grid_res": 96, "tolerance": 1e-5, "samples": 33,
            "endpoints": [
                {"base": [1.0], "fiber": [0.2]},
                {"base": [2.0], "fiber": [1.5]}
            ]
        }
    }"#;
    let (code, csv, _) = run(config, &["--seed", "3", "--reproducible"]);
    assert_eq!(code, 0);
    assert!(csv.contains("t,base,fiber,f,base_speed,fiber_speed,speed"));
    assert!(csv.contains("# length "));
    assert_eq!(
        csv.lines().filter(|l| !l.starts_with('#')).count(),
        1 + 33,
        "header row plus one row per sample"
    );
}

#[test]
fn cd_check_expectations_on_flat_torus() {
    let passing = r#"{
        "command": "cd-check",
        "space": {
            "base": {"kind": "circle", "radius": 1.0},
            "fiber": {"kind": "circle", "radius": 1.0},
            "warping": {"kind": "const", "c": 1.0},
            "exponent": 1.0
        },
        "parameters": {
            "k": 0.0, "n": 2.0,
            "blob_centers": [
                {"base": [1.0], "fiber": [1.0]},
                {"base": [3.5], "fiber": [4.0]}
            ],
            "blob_radius": 0.5, "max_atoms": 70,
            "atom_grid": [96, 96], "entropy_grid": [24, 24],
            "expect": "pass", "deficit_tolerance": 0.2
        }
    }"#;
    let (code, csv, stderr) = run(passing, &["--seed", "5", "--reproducible"]);
    assert_eq!(code, 0, "stderr: {stderr}");
    assert!(csv.contains("# wasserstein "));
    assert!(csv.contains("t,entropy,comparison,deficit,dropped_mass,violation"));

    // the same experiment must refuse an expectation of violation
    let contradicted = passing.replace(r#""expect": "pass""#, r#""expect": "violation""#);
    let (code, _, _) = run(&contradicted, &["--seed", "5", "--reproducible"]);
    assert_eq!(code, 3);
}

#[test]
fn bench_body_is_deterministic_under_reproducible() {
    let config = r#"{
        "command": "bench",
        "space": {
            "base": {"kind": "interval", "a": 0.0, "b": 3.141592653589793},
            "fiber": {"kind": "circle", "radius": 1.0},
            "warping": {"kind": "sin"},
            "exponent": 1.0
        },
        "parameters": {"pairs": 6, "grid_res": 64, "tolerance": 1e-4}
    }"#;
    let (code_a, csv_a, _) = run(config, &["--seed", "2", "--reproducible"]);
    let (code_b, csv_b, _) = run(config, &["--seed", "2", "--reproducible"]);
    assert_eq!(code_a, 0);
    assert_eq!(code_b, 0);
    assert!(!csv_a.contains("# elapsed-seconds"), "timing suppressed when reproducible");
    let body = |s: &str| {
        s.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(body(&csv_a), body(&csv_b));

    // without the flag, timing shows up in the header only
    let (_, csv_timed, _) = run(config, &["--seed", "2"]);
    assert!(csv_timed.contains("# elapsed-seconds"));
    assert_eq!(body(&csv_timed), body(&csv_a));
}

#[test]
fn env_threads_are_accepted() {
    let out = Command::new(env!("CARGO_BIN_EXE_warpcd"))
        .env("WARPCD_THREADS", "1")
        .args(["--config", "/nonexistent.json"])
        .output()
        .unwrap();
    // config error, but the env var must not break startup
    assert_eq!(out.status.code(), Some(1));
}
