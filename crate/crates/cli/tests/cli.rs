use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

use rqc_cli::{execute, replay, run_from_value, Payload, RunRecord};
use rqc_core::moment_op::MatrixFreeOperator;
use rqc_core::spectra::dense_second_eigenvalue;

fn rqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rqc")).args(args).output().unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let out = rqc(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    serde_json::from_str(&text).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rqc-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn gap_two_sites_is_exact() {
    let v = json(&["gap", "--n", "2", "--t", "2", "--d", "2", "--model", "lr"]);
    let reports = &v["result"]["spectral"];
    assert_eq!(reports[0]["quantity"], "g_local");
    assert!(reports[0]["value"].as_f64().unwrap().abs() < 1e-10);
    assert!((reports[1]["value"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(v["seed"], 0);
    assert_eq!(v["params"]["tol"], 1e-8);
}

#[test]
fn gap_matches_dense_oracle() {
    let m = MatrixFreeOperator::local_moment(3, 1, 2).unwrap();
    let dense = dense_second_eigenvalue(&m, 1, 4096).unwrap();
    assert!((dense - 0.5).abs() < 1e-12);
    let v = json(&["gap", "--n", "3", "--t", "1", "--d", "2"]);
    let g = v["result"]["spectral"][0]["value"].as_f64().unwrap();
    assert!((g - dense).abs() < 1e-8);

    let v = json(&["gap", "--n", "4", "--t", "1", "--d", "2", "--model", "plr"]);
    assert_eq!(v["result"]["spectral"][0]["quantity"], "g_parallel");
}

#[test]
fn exit_codes() {
    let out = rqc(&["gap", "--n", "3", "--t", "9", "--d", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t! guard"));

    let out = rqc(&["gap", "--n", "4", "--t", "2", "--d", "2", "--max-iter", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no convergence"));

    assert_eq!(rqc(&["gap", "--n", "3"]).status.code(), Some(1));
    assert_eq!(rqc(&["gap", "--n", "3", "--t", "1", "--d", "2", "--model", "plr"]).status.code(), Some(1));
    assert_eq!(rqc(&["bounds", "nonsense"]).status.code(), Some(1));
    assert_eq!(rqc(&["bounds", "converse", "n=10", "t=4", "d=2", "eps=0.1", "x=1"]).status.code(), Some(1));
    assert_eq!(rqc(&["mc", "--n", "30", "--d", "2", "--steps", "1", "--t", "1"]).status.code(), Some(1));
    assert_eq!(rqc(&["--help"]).status.code(), Some(0));
}

#[test]
fn frame_diagnostics() {
    let f = &json(&["frame", "--n", "3", "--t", "2", "--d", "2"])["result"]["frame"];
    assert_eq!(f["column_sum"], 1.125);
    assert_eq!(f["column_sum_bound"], 1.5);
    assert_eq!(f["column_sum_pass"], true);
    assert_eq!(f["deviation_pass"], true);

    let f = &json(&["frame", "--n", "1", "--t", "2", "--d", "2"])["result"]["frame"];
    assert_eq!(f["quasi_orthogonal"], false);
    assert!(f["column_sum_bound"].is_null() && f["deviation_pass"].is_null());

    let f = &json(&["frame", "--n", "4", "--t", "1", "--d", "2"])["result"]["frame"];
    assert_eq!(f["deviation"], 0.0);
    assert_eq!(f["deviation_pass"], true);

    let f = &json(&["frame", "--n", "3", "--t", "8", "--d", "2"])["result"]["frame"];
    assert!(f["deviation"].is_null() && f["rank"].is_null());
}

#[test]
fn monte_carlo_runs() {
    let v = json(&["mc", "--model", "lr", "--n", "2", "--d", "2", "--steps", "1", "--t", "2", "--samples", "10000", "--seed", "7"]);
    let r = &v["result"]["estimator"];
    let (est, se) = (r["estimate"].as_f64().unwrap(), r["std_error"].as_f64().unwrap());
    assert!((est - 2.0).abs() <= 3.0 * se);
    assert_eq!(r["haar_reference"], 2.0);

    let v = json(&["mc", "--n", "2", "--d", "2", "--steps", "0", "--t", "2", "--samples", "5"]);
    assert_eq!(v["result"]["estimator"]["estimate"], 256.0);

    let bad = scratch("bad_gates.json");
    std::fs::write(&bad, "[[1, 2, 3]").unwrap();
    let out = rqc(&["mc", "--model", "gset", "--gates", bad.to_str().unwrap(), "--n", "2", "--d", "2", "--steps", "1", "--t", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gate file"));

    // a single CNOT-like permutation gate
    let good = scratch("swap.json");
    let swap = "[[[1,0],[0,0],[0,0],[0,0],[0,0],[0,0],[1,0],[0,0],[0,0],[1,0],[0,0],[0,0],[0,0],[0,0],[0,0],[1,0]]]";
    std::fs::write(&good, swap).unwrap();
    let v = json(&["mc", "--model", "gset", "--gates", good.to_str().unwrap(), "--n", "2", "--d", "2", "--steps", "1", "--t", "1", "--samples", "4"]);
    // U = V always, so |tr(U†V)|² = 16
    assert_eq!(v["result"]["estimator"]["estimate"], 16.0);
}

#[test]
fn bounds_and_tqo() {
    let v = json(&["bounds", "converse", "n=10", "t=4", "d=2", "eps=0.1"]);
    let b = &v["result"]["bound"];
    let size = b["evaluations"][0]["value"].as_f64().unwrap();
    assert!((size - 0.135_542_515_340_908_4).abs() < 1e-12);
    assert_eq!(b["preconditions"][0]["met"], true);

    let v = json(&["bounds", "g_design", "value=0", "N=4", "t=2"]);
    assert_eq!(v["result"]["bound"]["evaluations"][0]["log10"], "-inf");

    let v = json(&["tqo", "--n", "8", "--d", "2", "--steps", "2400", "--l", "2", "--seed", "1"]);
    let r = &v["result"]["tqo"];
    for key in ["max_deviation_0", "max_deviation_1", "max_cross"] {
        assert!(r[key].as_f64().unwrap() <= 0.5);
    }
    assert_eq!(r["within_threshold"], true);
}

#[test]
fn text_output_is_readable() {
    let out = rqc(&["frame", "--n", "3", "--t", "2", "--d", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("column_sum = 1.125"));
    assert!(text.contains("pass"));
}

#[test]
fn sweep_writes_rows_in_grid_order() {
    let config = scratch("sweep.json");
    std::fs::write(
        &config,
        r#"{"subcommand": "frame", "params": {"d": 2}, "grid": {"t": [2, 3], "n": [3, 4]}}"#,
    )
    .unwrap();
    let csv_a = scratch("a.csv");
    let csv_b = scratch("b.csv");
    for path in [&csv_a, &csv_b] {
        let out = rqc(&["sweep", "--config", config.to_str().unwrap(), "--out", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 4);
    }
    let a = std::fs::read_to_string(&csv_a).unwrap();
    assert_eq!(a, std::fs::read_to_string(&csv_b).unwrap());
    let mut reader = csv::Reader::from_reader(a.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["index", "subcommand", "n", "t", "status", "value", "uncertainty", "error"]);
    let rows: Vec<(String, String)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[2].to_string(), r[3].to_string())
        })
        .collect();
    let expected = [("3", "2"), ("3", "3"), ("4", "2"), ("4", "3")];
    assert_eq!(rows.len(), 4);
    for (row, (n, t)) in rows.iter().zip(expected) {
        assert_eq!((row.0.as_str(), row.1.as_str()), (n, t));
    }
}

#[test]
fn bounds_sweep_merges_grid_into_args() {
    let config = scratch("bounds_sweep.json");
    std::fs::write(
        &config,
        r#"{"subcommand": "bounds", "params": {"name": "converse", "args": {"d": 2, "eps": 0.1}}, "grid": {"n": [10, 20], "t": [4]}}"#,
    )
    .unwrap();
    let out = rqc(&["sweep", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let first: Value = serde_json::from_str(String::from_utf8(out.stdout).unwrap().lines().next().unwrap()).unwrap();
    let size = first["result"]["bound"]["evaluations"][0]["value"].as_f64().unwrap();
    assert!((size - 0.135_542_515_340_908_4).abs() < 1e-12);
}

#[test]
fn records_round_trip_and_replay() {
    let runs = [
        ("gap", serde_json::json!({"n": 3, "t": 2, "d": 2})),
        ("frame", serde_json::json!({"n": 3, "t": 2, "d": 2})),
        ("mc", serde_json::json!({"n": 2, "d": 2, "steps": 2, "t": 1, "samples": 50, "seed": 3})),
        ("tqo", serde_json::json!({"n": 4, "d": 2, "steps": 5, "l": 1})),
        ("bounds", serde_json::json!({"name": "hiding", "args": [["n", "20"], ["d", "2"], ["s", "1.28e9"], ["r", "20"], ["delta", "0.1"]]})),
        ("bounds", serde_json::json!({"name": "g_design", "args": [["value", "0"], ["N", "4"], ["t", "2"]]})),
    ];
    for (sub, params) in runs {
        let run = run_from_value(sub, params).unwrap();
        let record = execute(&run).unwrap();
        let back = RunRecord::from_json(&record.to_json_line()).unwrap();
        assert_eq!(back, record);
        let fresh = replay(&back).unwrap();
        assert_eq!(fresh.result, record.result);
    }
}

#[test]
fn replay_detects_tampering() {
    let run = run_from_value("frame", serde_json::json!({"n": 3, "t": 2, "d": 2})).unwrap();
    let mut record = execute(&run).unwrap();
    if let Payload::Frame(f) = &mut record.result {
        f.column_sum = 2.0;
    }
    assert!(replay(&record).is_err());

    let file = scratch("records.jsonl");
    std::fs::write(&file, format!("{}\n", record.to_json_line())).unwrap();
    assert_eq!(rqc(&["replay", file.to_str().unwrap()]).status.code(), Some(1));
    let good = execute(&run).unwrap();
    std::fs::write(&file, format!("{}\n", good.to_json_line())).unwrap();
    assert_eq!(rqc(&["replay", file.to_str().unwrap()]).status.code(), Some(0));
}
