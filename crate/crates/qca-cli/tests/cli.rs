//! Behavioral and golden-file tests for the `qca` binary: worked examples,
//! usage-error taxonomy, schema pinning, seeding, and byte-level determinism.
//!
//! Golden files live in `tests/golden/`. Regenerate with
//! `QCA_REGEN_GOLDEN=1 cargo test -p qca-cli --test cli` after an intended
//! output change. JSON goldens are compared structurally with a tiny float
//! tolerance (absorbing libm last-ulp differences across platforms); CSV
//! goldens are byte-exact.

use std::path::PathBuf;
use std::process::Output;

use assert_cmd::Command;
use serde_json::Value;

fn qca() -> Command {
    let mut cmd = Command::cargo_bin("qca").unwrap();
    cmd.env_remove("QCA_SEED");
    cmd
}

fn run_ok(args: &[&str]) -> String {
    let output = qca().args(args).output().unwrap();
    assert!(
        output.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout).unwrap()
}

fn run_fail(args: &[&str], expected_code: i32) -> Output {
    let output = qca().args(args).output().unwrap();
    assert_eq!(
        output.status.code(),
        Some(expected_code),
        "command {args:?}: stderr {}",
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

/// Structural JSON comparison: identical shape, keys, strings, bools; numbers
/// within 1e-9 absolute + 1e-9 relative.
fn assert_json_close(actual: &Value, expected: &Value, path: &str) {
    match (actual, expected) {
        (Value::Object(a), Value::Object(b)) => {
            let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
            keys.sort();
            keys.dedup();
            for key in keys {
                match (a.get(key), b.get(key)) {
                    (Some(x), Some(y)) => assert_json_close(x, y, &format!("{path}.{key}")),
                    (x, y) => panic!("{path}.{key}: presence mismatch ({x:?} vs {y:?})"),
                }
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            assert_eq!(a.len(), b.len(), "{path}: array length");
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                assert_json_close(x, y, &format!("{path}[{i}]"));
            }
        }
        (Value::Number(a), Value::Number(b)) => {
            let (x, y) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            let tol = 1e-9 + 1e-9 * x.abs().max(y.abs());
            assert!((x - y).abs() <= tol, "{path}: {x} vs {y}");
        }
        (a, b) => assert_eq!(a, b, "{path}: value mismatch"),
    }
}

/// Compare output against a golden file (or regenerate it with
/// QCA_REGEN_GOLDEN=1). JSON goldens compare structurally, others byte-exact.
fn check_golden(name: &str, actual: &str) {
    let path = golden_path(name);
    if std::env::var_os("QCA_REGEN_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("missing golden {name} ({e}); run with QCA_REGEN_GOLDEN=1"));
    if name.ends_with(".json") {
        let a: Value = serde_json::from_str(actual).unwrap();
        let b: Value = serde_json::from_str(&expected).unwrap();
        assert_json_close(&a, &b, name);
    } else {
        assert_eq!(actual, expected, "golden mismatch for {name}");
    }
}

fn parse(stdout: &str) -> Value {
    serde_json::from_str(stdout).unwrap()
}

#[test]
fn affine_identity_golden() {
    let out = run_ok(&[
        "affine", "--alpha", "0", "--beta", "0", "--gamma", "0", "--lambda", "0", "--xi", "0",
        "--eta", "0",
    ]);
    let v = parse(&out);
    assert_eq!(v["schema"], "qca.affine/1");
    assert_eq!(v["case"], "xi_zero");
    assert_eq!(v["m"][0][0], 1.0);
    assert_eq!(v["m"][1][1], 1.0);
    assert_eq!(v["m"][2][2], 1.0);
    check_golden("affine_identity.json", &out);
}

#[test]
fn affine_degrees_matches_damping_point() {
    let out = run_ok(&[
        "affine",
        "--alpha",
        "60",
        "--beta",
        "0",
        "--gamma",
        "60",
        "--lambda",
        "0.5",
        "--xi",
        "0",
        "--eta",
        "0",
        "--degrees",
    ]);
    let v = parse(&out);
    let pt = &v["ad_point"];
    assert!((pt["x"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((pt["y"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert!((pt["z"].as_f64().unwrap() + 0.375).abs() < 1e-12);
    check_golden("affine_symmetric_point.json", &out);
}

#[test]
fn affine_csv_is_one_header_one_row() {
    let out = run_ok(&[
        "affine", "--alpha", "0.3", "--beta", "0.2", "--gamma", "0.3", "--lambda", "0.5", "--xi",
        "0.1", "--eta", "1.0", "--format", "csv",
    ]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("m11,m12,m13,"));
    assert_eq!(lines[1].split(',').count(), 18);
}

#[test]
fn affine_usage_errors() {
    let out = run_fail(
        &[
            "affine", "--alpha", "0", "--beta", "0", "--gamma", "0", "--lambda", "1.5", "--xi",
            "0", "--eta", "0",
        ],
        2,
    );
    assert!(stderr_of(&out).contains("lambda"));

    let out = run_fail(
        &[
            "affine",
            "--alpha",
            "0.5",
            "--beta",
            "0",
            "--gamma",
            "0.7",
            "--lambda",
            "0",
            "--xi",
            "0",
            "--eta",
            "0",
            "--canonical",
        ],
        2,
    );
    assert!(stderr_of(&out).contains("alpha must equal gamma"));
}

#[test]
fn gad_worked_example_golden() {
    let out = run_ok(&[
        "gad", "--eps0", "1", "--eps2", "0", "--gamma0", "0.64", "--gamma2", "0",
    ]);
    let v = parse(&out);
    assert_eq!(v["schema"], "qca.gad/1");
    let m = &v["affine"]["m"];
    assert!((m[0][0].as_f64().unwrap() - 0.8).abs() < 1e-12);
    assert!((m[1][1].as_f64().unwrap() - 0.8).abs() < 1e-12);
    assert!((m[2][2].as_f64().unwrap() - 0.64).abs() < 1e-12);
    assert!((v["affine"]["c"][2].as_f64().unwrap() - 0.36).abs() < 1e-12);
    assert!(v["trace_defect"].as_f64().unwrap() < 1e-12);
    assert!(v["choi_min_eigenvalue"].as_f64().unwrap() > -1e-10);
    check_golden("gad_decay_point.json", &out);
}

#[test]
fn gad_identity_point() {
    let out = run_ok(&[
        "gad", "--eps0", "1", "--eps2", "0", "--gamma0", "1", "--gamma2", "0",
    ]);
    let v = parse(&out);
    assert_eq!(v["point"]["x"], 1.0);
    assert_eq!(v["point"]["y"], 1.0);
    assert_eq!(v["point"]["z"], 0.0);
}

#[test]
fn gad_rejects_infeasible_params() {
    let out = run_fail(
        &[
            "gad", "--eps0", "0.9", "--eps2", "0.9", "--gamma0", "1", "--gamma2", "1",
        ],
        2,
    );
    assert!(stderr_of(&out).contains("exceeds 1"));
}

#[test]
fn volume_gad_golden() {
    let out = run_ok(&[
        "volume",
        "gad",
        "--samples",
        "10000",
        "--grid",
        "64",
        "--seed",
        "7",
    ]);
    let v = parse(&out);
    assert_eq!(v["schema"], "qca.volume/1");
    assert_eq!(v["region"], "gad");
    assert_eq!(v["mode"], "forward");
    assert_eq!(v["samples"], 10000);
    check_golden("volume_gad_small.json", &out);
}

#[test]
fn volume_single_env_golden() {
    let out = run_ok(&["volume", "single-env", "--grid", "50"]);
    let v = parse(&out);
    assert_eq!(v["region"], "single_env");
    assert_eq!(v["mode"], "membership");
    assert_eq!(v["exact"]["numerator"], 2);
    assert_eq!(v["exact"]["denominator"], 15);
    check_golden("volume_single_env_small.json", &out);
}

#[test]
fn volume_usage_guards() {
    let out = run_fail(&["volume", "gad", "--samples", "100", "--grid", "64"], 2);
    assert!(stderr_of(&out).contains("--samples"));

    let out = run_fail(&["volume", "gad", "--grid", "30"], 2);
    assert!(stderr_of(&out).contains("--grid"));

    let out = run_fail(&["volume", "gad", "--grid", "2000"], 2);
    assert!(stderr_of(&out).contains("--grid"));

    let out = run_fail(
        &["volume", "single-env", "--grid", "64", "--samples", "10000"],
        2,
    );
    assert!(stderr_of(&out).contains("--samples"));
}

#[test]
fn volume_memory_cap_is_a_runtime_failure() {
    let out = run_fail(
        &[
            "volume",
            "gad",
            "--samples",
            "10000",
            "--grid",
            "1000",
            "--mem-cap",
            "1024",
        ],
        1,
    );
    assert!(stderr_of(&out).contains("cap"));
}

#[test]
fn volume_grid_out_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let grid_path = dir.path().join("grid.json");
    run_ok(&[
        "volume",
        "gad",
        "--samples",
        "10000",
        "--grid",
        "50",
        "--seed",
        "7",
        "--grid-out",
        grid_path.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&grid_path).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["schema"], "qca.grid/1");
    assert_eq!(v["resolution"], 50);
    assert!(v["bitset"].as_str().unwrap().len() > 100);
}

#[test]
fn ratio_golden() {
    let out = run_ok(&["ratio", "--samples", "10000", "--grid", "64", "--seed", "7"]);
    let v = parse(&out);
    assert_eq!(v["schema"], "qca.ratio/1");
    assert_eq!(v["single_env_exact"]["numerator"], 2);
    assert_eq!(v["documented_bound"], 0.375);
    check_golden("ratio_small.json", &out);
}

#[test]
fn containment_usage_guards() {
    let out = run_fail(
        &["containment", "--gad-samples", "1000", "--grid", "100"],
        2,
    );
    assert!(stderr_of(&out).contains("--gad-samples"));

    let out = run_fail(&["containment", "--grid", "400"], 2);
    assert!(stderr_of(&out).contains("--grid"));
}

#[test]
fn cloud_csv_golden_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cloud.csv");
    let out = run_ok(&[
        "cloud",
        "gad",
        "--samples",
        "10",
        "--seed",
        "1",
        "--out",
        csv.to_str().unwrap(),
    ]);
    let v = parse(&out);
    assert_eq!(v["schema"], "qca.cloud/1");
    assert_eq!(v["region"], "gad");
    assert_eq!(v["samples"], 10);
    let body = std::fs::read_to_string(&csv).unwrap();
    assert!(body.starts_with("x,y,z\n"));
    assert_eq!(body.lines().count(), 11);
    check_golden("cloud_gad_ten.csv", &body);
}

#[test]
fn cloud_json_is_importable() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cloud.json");
    run_ok(&[
        "cloud",
        "single-env",
        "--samples",
        "25",
        "--seed",
        "4",
        "--out",
        path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let cloud = qca_core::geometry::import_cloud(&path).unwrap();
    assert_eq!(cloud.points.len(), 25);
    assert_eq!(cloud.provenance.seed, 4);
    assert!(cloud
        .points
        .iter()
        .all(qca_core::geometry::single_env_contains));
}

#[test]
fn repeats_and_worker_counts_are_byte_identical() {
    let base = [
        "volume",
        "gad",
        "--samples",
        "100000",
        "--grid",
        "64",
        "--seed",
        "3",
    ];
    let first = run_ok(&base);
    let again = run_ok(&base);
    assert_eq!(first, again);
    let w1 = run_ok(&[&base[..], &["--workers", "1"]].concat());
    let w3 = run_ok(&[&base[..], &["--workers", "3"]].concat());
    assert_eq!(w1, w3);
    assert_eq!(first, w1);

    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, workers) in [(&a, "1"), (&b, "4")] {
        run_ok(&[
            "cloud",
            "single-env",
            "--samples",
            "50000",
            "--seed",
            "1",
            "--out",
            path.to_str().unwrap(),
            "--workers",
            workers,
        ]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn seed_env_var_is_the_default() {
    let explicit = run_ok(&[
        "volume",
        "gad",
        "--samples",
        "10000",
        "--grid",
        "50",
        "--seed",
        "3",
    ]);
    let via_env = qca()
        .env("QCA_SEED", "3")
        .args(["volume", "gad", "--samples", "10000", "--grid", "50"])
        .output()
        .unwrap();
    assert!(via_env.status.success());
    assert_eq!(explicit, String::from_utf8(via_env.stdout).unwrap());

    let default_seed = run_ok(&["volume", "gad", "--samples", "10000", "--grid", "50"]);
    let v = parse(&default_seed);
    assert_eq!(v["seed"], 7);
    assert_ne!(explicit, default_seed);
}

#[test]
fn validate_quick_passes_and_reports_checks() {
    let out = run_ok(&["validate", "--quick"]);
    let v = parse(&out);
    assert_eq!(v["schema"], "qca.validate/1");
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 12);
    assert!(v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"] == true));
}

#[test]
fn version_flag_names_the_tool() {
    let out = run_ok(&["--version"]);
    assert!(out.starts_with("qca "));
}
