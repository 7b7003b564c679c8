use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn clickstats(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clickstats"))
        .args(args)
        .env_remove("CLICKSTATS_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = clickstats(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn failure(args: &[&str]) -> String {
    let out = clickstats(args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    assert!(out.stdout.is_empty());
    String::from_utf8(out.stderr).unwrap()
}

fn schema() -> jsonschema::JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/table.schema.json");
    let raw: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::JSONSchema::compile(&raw).unwrap()
}

fn read_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r
        .headers()
        .unwrap()
        .iter()
        .map(String::from)
        .collect::<Vec<_>>();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect::<Vec<_>>())
        .collect();
    (header, rows)
}

#[test]
fn kernel_spot_value() {
    let (header, rows) = read_csv(&stdout(&[
        "kernel",
        "--n-elements",
        "2",
        "--eta",
        "1",
        "--n-max",
        "10",
    ]));
    assert_eq!(&header[..4], &["n_elements", "eta", "k", "n_0"]);
    assert_eq!(header.len(), 3 + 11);
    let col = header.iter().position(|h| h == "n_2").unwrap();
    assert_eq!(rows[1][col].parse::<f64>().unwrap(), 0.5);
}

#[test]
fn validation_errors_name_the_flag() {
    let cases: &[(&[&str], &str)] = &[
        (
            &[
                "kernel",
                "--n-elements",
                "2",
                "--eta",
                "1.5",
                "--n-max",
                "4",
            ],
            "--eta",
        ),
        (
            &["kernel", "--n-elements", "0", "--n-max", "4"],
            "--n-elements",
        ),
        (
            &["squeezed", "--zeta", "1.0", "--n-elements", "2"],
            "--zeta",
        ),
        (
            &[
                "squeezed",
                "--zeta",
                "0.5",
                "--n-elements",
                "2",
                "--eta2",
                "-0.1",
            ],
            "--eta2",
        ),
        (
            &[
                "counts",
                "--state",
                "thermal",
                "--mean",
                "-2",
                "--n-elements",
                "2",
            ],
            "--mean",
        ),
        (
            &[
                "counts",
                "--state",
                "thermal",
                "--mean",
                "0:1:0",
                "--n-elements",
                "2",
            ],
            "--mean",
        ),
        (
            &[
                "metrics",
                "--state",
                "coherent",
                "--mean",
                "1",
                "--n-elements",
                "2",
                "--tail",
                "0",
            ],
            "--tail",
        ),
        (
            &[
                "sample",
                "--state",
                "coherent",
                "--mean",
                "1",
                "--n-elements",
                "2",
                "--shots",
                "0",
            ],
            "--shots",
        ),
    ];
    for (args, flag) in cases {
        let err = failure(args);
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
        assert!(err.contains(flag), "{args:?}: {err}");
    }
    assert!(failure(cases[0].0).contains("efficiency out of range"));
}

#[test]
fn no_partial_file_on_failure() {
    let dir = std::env::temp_dir().join(format!("clickstats-fail-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_clickstats"))
        .args([
            "counts",
            "--state",
            "coherent",
            "--mean",
            "1,2,-3",
            "--n-elements",
            "4",
            "--output",
            "c.csv",
        ])
        .env("CLICKSTATS_OUTPUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(!dir.join("c.csv").exists());

    let out = Command::new(env!("CARGO_BIN_EXE_clickstats"))
        .args([
            "counts",
            "--state",
            "coherent",
            "--mean",
            "1,2",
            "--n-elements",
            "4",
            "--output",
            "c.csv",
        ])
        .env("CLICKSTATS_OUTPUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let (_, rows) = read_csv(&std::fs::read_to_string(dir.join("c.csv")).unwrap());
    assert_eq!(rows.len(), 2 * 5);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn sampling_is_deterministic() {
    let args = [
        "sample",
        "--state",
        "tmsv",
        "--zeta",
        "0.8",
        "--n-elements",
        "4",
        "--shots",
        "100000",
        "--seed",
        "7",
    ];
    let a = clickstats(&args);
    let b = clickstats(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let (header, rows) = read_csv(std::str::from_utf8(&a.stdout).unwrap());
    assert!(header.contains(&"seed".to_string()) && header.contains(&"shots".to_string()));
    assert_eq!(rows.len(), 25);
    let other = clickstats(&[
        "sample",
        "--state",
        "tmsv",
        "--zeta",
        "0.8",
        "--n-elements",
        "4",
        "--shots",
        "100000",
        "--seed",
        "8",
    ]);
    assert_ne!(a.stdout, other.stdout);

    let metrics = stdout(&[
        "sample",
        "--state",
        "tmsv",
        "--zeta",
        "0.8",
        "--n-elements",
        "4",
        "--shots",
        "100000",
        "--seed",
        "7",
        "--report",
        "metrics",
    ]);
    let (header, rows) = read_csv(&metrics);
    let g2 = rows[0][header.iter().position(|h| h == "g2").unwrap()]
        .parse::<f64>()
        .unwrap();
    assert!((g2 - 1.8789).abs() < 0.05, "g2 = {g2}");
}

#[test]
fn csv_round_trips_to_library_values() {
    let text = stdout(&[
        "moments",
        "--state",
        "thermal",
        "--mean",
        "0.5:4:8",
        "--n-elements",
        "4",
        "--oracle",
        "both",
    ]);
    let (header, rows) = read_csv(&text);
    let gap = header.iter().position(|h| h == "discrepancy").unwrap();
    for row in &rows {
        assert_eq!(row.len(), header.len());
        assert!(row[gap].parse::<f64>().unwrap() < 1e-10);
    }
    let mean = header.iter().position(|h| h == "mean").unwrap();
    let mut seen = Vec::new();
    for row in &rows {
        seen.push(row[mean].parse::<f64>().unwrap());
    }
    assert_eq!(seen.first(), Some(&0.5));
    assert_eq!(seen.last(), Some(&4.0));
}

#[test]
fn json_validates_against_shipped_schema() {
    let schema = schema();
    let runs: &[&[&str]] = &[
        &["kernel", "--ideal-detector", "--eta", "0.5", "--n-max", "6"],
        &[
            "counts",
            "--state",
            "multimode",
            "--modes",
            "1..3",
            "--mean",
            "0,2",
            "--n-elements",
            "4",
        ],
        &[
            "moments",
            "--state",
            "coherent",
            "--mean",
            "1",
            "--n-elements",
            "1,8",
            "--oracle",
            "both",
        ],
        &[
            "metrics",
            "--state",
            "thermal",
            "--mean",
            "0:2:3",
            "--ideal-detector",
        ],
        &[
            "squeezed",
            "--zeta",
            "0,0.5",
            "--n-elements",
            "3",
            "--eta",
            "0.9",
        ],
        &["squeezed", "--zeta", "0.5", "--n-elements", "3", "--joint"],
        &[
            "sample",
            "--state",
            "thermal",
            "--mean",
            "1",
            "--n-elements",
            "3",
            "--shots",
            "2000",
            "--report",
            "metrics",
        ],
        &[
            "sample",
            "--state",
            "coherent",
            "--mean",
            "1",
            "--n-elements",
            "3",
            "--shots",
            "2000",
            "--independent",
        ],
    ];
    for args in runs {
        let mut full = args.to_vec();
        full.extend(["--format", "json"]);
        let v: Value = serde_json::from_str(&stdout(&full)).unwrap();
        if let Err(errors) = schema.validate(&v) {
            let msgs: Vec<String> = errors.map(|e| e.to_string()).collect();
            panic!("{args:?}: {msgs:?}");
        }
        assert_eq!(v["command"], Value::from(args[0]));
        let columns = v["columns"].as_array().unwrap();
        for row in v["rows"].as_array().unwrap() {
            assert_eq!(row.as_object().unwrap().len(), columns.len());
        }
    }
}

#[test]
fn undefined_witnesses_are_tagged() {
    let text = stdout(&[
        "metrics",
        "--state",
        "coherent",
        "--mean",
        "0",
        "--n-elements",
        "2",
    ]);
    let (header, rows) = read_csv(&text);
    let q = header.iter().position(|h| h == "q_fano").unwrap();
    assert_eq!(rows[0][q], "undefined(zero_mean)");
}

#[test]
fn grid_order_is_stable_under_parallelism() {
    let args = [
        "metrics",
        "--state",
        "multimode",
        "--modes",
        "1..4",
        "--mean",
        "0.1:10:30:log",
        "--n-elements",
        "1..6",
        "--eta",
        "0.3,1",
    ];
    let a = stdout(&args);
    let (header, rows) = read_csv(&a);
    assert_eq!(rows.len(), 4 * 30 * 6 * 2);
    let idx = |n: &str| header.iter().position(|h| h == n).unwrap();
    let key = |r: &Vec<String>| {
        (
            r[idx("n_elements")].parse::<u32>().unwrap(),
            r[idx("eta")].parse::<f64>().unwrap().to_bits(),
            r[idx("modes")].parse::<u32>().unwrap(),
            r[idx("mean")].parse::<f64>().unwrap().to_bits(),
        )
    };
    let keys: Vec<_> = rows.iter().map(key).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(stdout(&args), a);
}
