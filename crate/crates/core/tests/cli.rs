use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_switchstab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

/// Error paths print exactly one JSON line on stderr.
fn assert_error(out: &Output, code: i32, kind: &str) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    let v: Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["error"], kind);
    assert!(v["message"].as_str().is_some_and(|m| !m.is_empty()));
}

#[test]
fn bounds_scalar_class_file() {
    let dir = TempDir::new().unwrap();
    let class = write(
        &dir,
        "half.json",
        r#"{"m": 1, "n": 2, "matrices": [[0.5, 0, 0, 0.5]]}"#,
    );
    let out = run(&["bounds", &class, "--depth", "3", "--deterministic"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["results"]["kind"], "bounds");
    assert_eq!(v["results"]["verdict"], "LikelyStable");
    assert_eq!(v["input_class"]["matrices"][0][3], 0.5);
    assert!(v.get("wall_time_secs").is_none());
}

#[test]
fn bounds_family_shorthand() {
    let v = json(&run(&["bounds", "--t", "s:6", "--depth", "8"]));
    assert_eq!(v["results"]["verdict"], "ProvenUnstable");
    assert!(v["wall_time_secs"].as_f64().is_some());

    let v = json(&run(&["bounds", "--t", "t:4", "--depth", "10"]));
    assert!(v["results"]["best_upper"].as_f64().unwrap() < 1.0);
}

#[test]
fn deterministic_runs_are_byte_identical() {
    for args in [
        &["bounds", "--t", "t:3", "--depth", "6", "--deterministic"][..],
        &[
            "norm",
            "--t",
            "t:3",
            "--q",
            "auto",
            "--verify",
            "--deterministic",
        ][..],
        &[
            "verify-appendix",
            "--word-len",
            "6",
            "--random-words",
            "3",
            "--deterministic",
        ][..],
    ] {
        let a = run(args);
        let b = run(args);
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn run_report_round_trips_through_library() {
    let out = run(&[
        "criterion",
        "--r2",
        "0",
        "0.5",
        "0.5",
        "0",
        "--cross-depth",
        "8",
        "--deterministic",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let report = switchstab::report::RunReport::from_json(&text).unwrap();
    assert_eq!(report.to_json().unwrap() + "\n", text);
}

#[test]
fn verify_suite_defaults_pass() {
    let out = run(&["verify-appendix", "--deterministic"]);
    let v = json(&out);
    let failed: Vec<_> = v["results"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] != true)
        .map(|c| format!("{}: {}", c["name"], c["detail"]))
        .collect();
    assert!(failed.is_empty(), "failed checks: {failed:?}");
    assert!(out.status.success());
}

#[test]
fn verify_suite_odd_angle_residuals() {
    let v = json(&run(&[
        "verify-appendix",
        "--n-max",
        "30",
        "--word-len",
        "8",
        "--deterministic",
    ]));
    let check = v["results"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "odd_angle_flip")
        .unwrap()
        .clone();
    assert_eq!(check["cases"], 30);
    assert!(check["worst"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn verify_suite_detects_perturbation() {
    let out = run(&[
        "verify-appendix",
        "--word-len",
        "6",
        "--random-words",
        "3",
        "--perturb",
        "1e-3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["results"]["passed"], false);
}

#[test]
fn classification_csv_small_and_to_file() {
    let out = run(&["figure1", "--n-max", "2"]);
    assert!(out.status.success());
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let labels: Vec<String> = rows
        .iter()
        .map(|r| format!("{}{}", &r[1][..1], &r[0]))
        .collect();
    assert_eq!(labels, ["t2", "s2", "t3"]);
    let t: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(t[0] > t[1] && t[1] > t[2]);

    let dir = TempDir::new().unwrap();
    let path = dir.path().join("fig.csv");
    let out = run(&[
        "figure1",
        "--n-max",
        "3",
        "--depth",
        "6",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(
        std::fs::read_to_string(&path).unwrap().lines().count(),
        1 + 5
    );
}

#[test]
fn criterion_examples() {
    let v = json(&run(&["criterion", "--r2", "1", "0", "0", "1"]));
    assert_eq!(v["results"]["outcome"]["verdict"], "Stable");
    assert_eq!(v["results"]["outcome"]["case"], "a");

    let v = json(&run(&["criterion", "--r2", "-1", "0", "3.9", "-1"]));
    assert_eq!(v["results"]["outcome"]["case"], "d");

    let v = json(&run(&[
        "criterion",
        "--r2",
        "-1",
        "4",
        "4",
        "-1",
        "--cross-depth",
        "12",
    ]));
    assert_eq!(v["results"]["outcome"]["verdict"], "NotStable");
    assert_eq!(v["results"]["cross_validation"]["agreement"], "Agree");

    let dir = TempDir::new().unwrap();
    let rows = write(&dir, "rows.json", "[[0.6, 0.6], [0.6, 0.6]]");
    let v = json(&run(&["criterion", "--rplus", &rows]));
    assert_eq!(v["results"]["kind"], "rplus");
    assert_eq!(v["results"]["outcome"]["verdict"], "NotStable");
    assert!((v["results"]["outcome"]["perron_root"].as_f64().unwrap() - 1.2).abs() < 1e-10);

    let zero = write(&dir, "zero.json", "[[0.5, 0.0], [0.5, 0.5]]");
    assert_error(&run(&["criterion", "--rplus", &zero]), 2, "invalid_input");
}

#[test]
fn norm_build_evaluate_verify() {
    let out = run(&[
        "norm",
        "--t",
        "t:3",
        "--q",
        "auto",
        "--depth",
        "6",
        "--evaluate",
        "1,0",
        "--verify",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    let r = &v["results"];
    assert_eq!(r["kind"], "norm");
    assert!(r["q"].as_f64().unwrap() < 1.0);
    assert!(r["evaluated"].as_f64().unwrap() >= 1.0);
    assert_eq!(r["level_sizes"].as_array().unwrap().len(), 7);
    for c in r["contraction"].as_array().unwrap() {
        assert_eq!(c["violations"], 0);
    }
    assert_error(&run(&["norm", "--t", "s:6", "--q", "auto"]), 2, "domain");
    assert_error(
        &run(&["norm", "--t", "t:3", "--q", "fast"]),
        2,
        "invalid_input",
    );
}

#[test]
fn regularity_of_word_file() {
    let dir = TempDir::new().unwrap();
    let word = write(&dir, "w.json", "[1, 2, 2, 1, 3, 2, 1, 3, 3]");
    let v = json(&run(&["regularity", "--m", "3", &word]));
    assert_eq!(v["results"]["index"], 2);
    assert_eq!(v["results"]["profile"].as_array().unwrap().len(), 10);
    assert_error(
        &run(&["regularity", "--m", "2", &word]),
        2,
        "index_out_of_range",
    );
}

#[test]
fn error_paths_exit_nonzero_with_one_json_line() {
    let dir = TempDir::new().unwrap();
    assert_error(
        &run(&["bounds", "/nonexistent/class.json"]),
        2,
        "invalid_input",
    );
    let bad = write(
        &dir,
        "bad.json",
        r#"{"m": 2, "n": 2, "matrices": [[1, 0, 0, 1]]}"#,
    );
    assert_error(&run(&["bounds", &bad]), 2, "invalid_input");
    let nan = write(
        &dir,
        "nan.json",
        "{\"m\": 1, \"n\": 1, \"matrices\": [[1e999]]}",
    );
    assert_eq!(run(&["bounds", &nan]).status.code(), Some(2));
    assert_error(
        &run(&["bounds", "--t", "s:6", "--depth", "30"]),
        3,
        "budget_exceeded",
    );
    assert_error(&run(&["bounds", "--t", "q:3"]), 2, "invalid_input");
    assert_error(&run(&["bounds", "--t", "1.5"]), 2, "domain");
    assert_error(&run(&["bounds"]), 2, "usage");
    assert_error(&run(&["criterion", "--r2", "1", "2"]), 2, "usage");
    assert_error(&run(&["frobnicate"]), 2, "usage");
    let out_dir = dir.path().join("missing").join("out.json");
    assert!(!Path::new(&out_dir).exists());
    assert_error(
        &run(&["bounds", "--t", "t:3", "--out", out_dir.to_str().unwrap()]),
        2,
        "invalid_input",
    );
}

#[test]
fn help_and_version_exit_zero() {
    assert!(run(&["--help"]).status.success());
    let v = run(&["--version"]);
    assert!(v.status.success());
    assert!(String::from_utf8_lossy(&v.stdout).contains(env!("CARGO_PKG_VERSION")));
}
