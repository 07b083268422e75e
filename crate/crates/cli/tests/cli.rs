use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn jlt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jlt"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .env_remove("JLT_SEED")
        .output()
        .expect("spawn jlt")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn constants_table() {
    let out = jlt(&["constants", "--gamma", "1.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["manifest"]["command"], "constants");
    assert_eq!(v["manifest"]["timestamp"], "2023-11-14T22:13:20Z");
    let row = &v["report"][0];
    assert!((row["l_classical"].as_f64().unwrap() - 3.0 / 16.0).abs() < 1e-12);
}

#[test]
fn constants_rejects_small_gamma() {
    assert_eq!(
        jlt(&["constants", "--gamma", "0.25"]).status.code(),
        Some(1)
    );
}

#[test]
fn check_single_site() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "p.json", r#"{"offset": 0, "b": [1.0]}"#);
    let out = jlt(&["check", &file, "--variant", "hs1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["report"]["ratio"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert!((v["report"]["eigenvalues_above"][0].as_f64().unwrap() - 5f64.sqrt()).abs() < 1e-10);
}

#[test]
fn check_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        dir.path(),
        "p.json",
        r#"{"offset": -2, "b": [0.5, -1.0], "a": [1.2, 0.7]}"#,
    );
    let csv_out = dir.path().join("r.csv");
    let status = jlt(&[
        "check",
        &file,
        "--variant",
        "new-gamma-jacobi",
        "--gamma",
        "2",
        "--format",
        "csv",
        "--out",
        csv_out.to_str().unwrap(),
    ])
    .status;
    assert_eq!(status.code(), Some(0));
    let json_out = json(&jlt(&[
        "check",
        &file,
        "--variant",
        "new-gamma-jacobi",
        "--gamma",
        "2",
    ]));

    let text = fs::read_to_string(&csv_out).unwrap();
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        ["variant", "gamma", "lhs", "rhs", "ratio", "margin_used"]
    );
    let row = rdr.records().next().unwrap().unwrap();
    assert_eq!(&row[0], "new-gamma-jacobi");
    for (i, key) in [(2, "lhs"), (3, "rhs"), (4, "ratio")] {
        assert_eq!(
            row[i].parse::<f64>().unwrap(),
            json_out["report"][key].as_f64().unwrap()
        );
    }
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "p.json", r#"{"offset": 0, "b": [1.0]}"#);
    let neg = write(dir.path(), "n.json", r#"{"offset": 0, "b": [-1.0]}"#);
    let bad_a = write(
        dir.path(),
        "a.json",
        r#"{"offset": 0, "b": [1.0], "a": [-1.0]}"#,
    );
    let broken = write(dir.path(), "x.json", "{");
    for args in [
        vec![
            "check",
            good.as_str(),
            "--variant",
            "new-gamma-jacobi",
            "--gamma",
            "0.7",
        ],
        vec!["check", neg.as_str(), "--variant", "new-gamma-schrodinger"],
        vec!["check", bad_a.as_str(), "--variant", "hs1"],
        vec!["check", broken.as_str(), "--variant", "hs1"],
        vec!["check", "/nonexistent.json", "--variant", "hs1"],
        vec!["check", good.as_str(), "--variant", "nope"],
        vec!["search", "--variant", "hs1", "--bounds", "3,1"],
        vec!["frobnicate"],
    ] {
        assert_eq!(jlt(&args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(jlt(&["--help"]).status.code(), Some(0));
    assert_eq!(jlt(&["--version"]).status.code(), Some(0));
}

#[test]
fn empty_fuzz_is_clean() {
    let out = jlt(&["fuzz", "--count", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["count"], 0);
    assert!(v["report"]["theorems"]
        .as_array()
        .unwrap()
        .iter()
        .all(|t| t["violations"] == 0));
}

#[test]
fn small_fuzz_passes() {
    let out = jlt(&[
        "fuzz",
        "--count",
        "20",
        "--lemma-count",
        "50",
        "--seed",
        "3",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 17 + 6);
}

#[test]
fn seed_from_environment() {
    let run = |env: Option<&str>, args: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_jlt"));
        cmd.args(args)
            .env("SOURCE_DATE_EPOCH", "0")
            .env_remove("JLT_SEED");
        if let Some(s) = env {
            cmd.env("JLT_SEED", s);
        }
        cmd.output().unwrap().stdout
    };
    let args = [
        "fuzz",
        "--count",
        "3",
        "--lemma-count",
        "3",
        "--variant-set",
        "hs1",
        "--gamma-grid",
        "1",
    ];
    let from_env = run(Some("9"), &args);
    let mut explicit = args.to_vec();
    explicit.extend(["--seed", "9"]);
    assert_eq!(from_env, run(None, &explicit));
    assert_ne!(from_env, run(None, &args));
}

#[test]
fn search_writes_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let status = jlt(&[
        "search",
        "--variant",
        "new-gamma-schrodinger",
        "--bounds",
        "0.01,10",
        "--restarts",
        "2",
        "--out",
        out.to_str().unwrap(),
    ])
    .status;
    assert_eq!(status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let best = v["report"]["result"]["best_ratio"].as_f64().unwrap();
    assert!(best > 0.8 && best < 1.0);
    let profile = fs::read_to_string(dir.path().join("s.json.ratio.dat")).unwrap();
    let lines: Vec<_> = profile.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines.len(), 200);
    for l in lines {
        let cols: Vec<f64> = l.split_whitespace().map(|x| x.parse().unwrap()).collect();
        assert_eq!(cols.len(), 2);
        assert!(cols[1] <= best + 1e-12);
    }
}

#[test]
fn spectrum_lists_outward_in() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        dir.path(),
        "p.json",
        r#"{"offset": 0, "b": [3.0, 0.0, 0.0, 0.0, 2.5]}"#,
    );
    let v = json(&jlt(&["spectrum", &file]));
    let above: Vec<f64> = v["report"]["above"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(above.len(), 2);
    assert!(above[0] > above[1] && above[1] > 2.0);
    assert!(v["report"]["below"].as_array().unwrap().is_empty());
}
