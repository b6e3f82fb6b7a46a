//! Parameter sweeps over a grid of configurations.
//!
//! A sweep file is a JSON object:
//!
//! ```json
//! { "subcommand": "gap", "params": { "d": 2 }, "grid": { "n": [3, 4], "t": [2, 3] } }
//! ```
//!
//! Grid keys are expanded in sorted order with the last key varying fastest.
//! For `bounds`, `params` holds `name` and an `args` object, and grid keys
//! other than `name` are added to `args`.

use std::io::Write;
use std::path::Path;

use serde::Deserialize;
use serde_json::{Map, Value};

use crate::{execute, run_from_value, usage, CliError, CliResult, Payload, Run, RunRecord};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub subcommand: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub grid: Map<String, Value>,
}

impl SweepConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .or_else(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).or_else(|e| usage(format!("sweep file {}: {e}", path.display())))
    }

    pub fn grid_keys(&self) -> Vec<String> {
        self.grid.keys().cloned().collect()
    }

    /// All grid points, each as `(key, value)` pairs in key order.
    pub fn points(&self) -> CliResult<Vec<Vec<(String, Value)>>> {
        let mut points = vec![Vec::new()];
        for (key, values) in &self.grid {
            let Value::Array(values) = values else {
                return usage(format!("grid entry {key} must be an array"));
            };
            if values.is_empty() {
                return usage(format!("grid entry {key} is empty"));
            }
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push((key.clone(), v.clone()));
                        q
                    })
                })
                .collect();
        }
        Ok(points)
    }

    pub fn run_at(&self, point: &[(String, Value)]) -> CliResult<Run> {
        let mut params = self.params.clone();
        if self.subcommand == "bounds" {
            let mut args: Vec<Value> = match params.remove("args") {
                None => Vec::new(),
                Some(Value::Object(m)) => m.into_iter().map(|(k, v)| pair(k, &v)).collect(),
                Some(_) => return usage("bounds params.args must be an object"),
            };
            for (k, v) in point {
                if k == "name" {
                    params.insert(k.clone(), v.clone());
                } else {
                    args.push(pair(k.clone(), v));
                }
            }
            params.insert("args".into(), Value::Array(args));
        } else {
            for (k, v) in point {
                params.insert(k.clone(), v.clone());
            }
        }
        run_from_value(&self.subcommand, Value::Object(params))
    }
}

fn pair(key: String, v: &Value) -> Value {
    let text = match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    Value::Array(vec![Value::String(key), Value::String(text)])
}

/// Fixed trailing CSV columns.
pub const CSV_COLUMNS: [&str; 4] = ["status", "value", "uncertainty", "error"];

/// Headline number and its uncertainty for the CSV summary.
fn headline(record: &RunRecord) -> (String, String) {
    match &record.result {
        Payload::Spectral(r) => (r[0].value.to_string(), r[0].residual.to_string()),
        Payload::Frame(f) => (f.column_sum.to_string(), String::new()),
        Payload::Estimator(e) => (e.estimate.to_string(), e.std_error.to_string()),
        Payload::Tqo(t) => (
            t.max_deviation_0.max(t.max_deviation_1).max(t.max_cross).to_string(),
            String::new(),
        ),
        Payload::Bound(b) => (
            b.evaluations
                .first()
                .and_then(|e| e.value)
                .map(|v| v.to_string())
                .unwrap_or_default(),
            String::new(),
        ),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Runs every grid point, printing JSON Lines to `jsonl` and, if given, a
/// CSV summary to `csv_path`. Returns the worst exit code.
pub fn run_sweep(config: &SweepConfig, jsonl: &mut dyn Write, csv_path: Option<&Path>) -> CliResult<u8> {
    let points = config.points()?;
    let keys = config.grid_keys();
    let mut csv = match csv_path {
        Some(p) => Some(csv::Writer::from_path(p).or_else(|e| usage(format!("cannot write {}: {e}", p.display())))?),
        None => None,
    };
    let io = |e: std::io::Error| CliError::Usage(format!("write failed: {e}"));
    let csv_err = |e: csv::Error| CliError::Usage(format!("CSV write failed: {e}"));
    if let Some(w) = csv.as_mut() {
        let header = ["index", "subcommand"]
            .iter()
            .map(|s| s.to_string())
            .chain(keys.iter().cloned())
            .chain(CSV_COLUMNS.iter().map(|s| s.to_string()));
        w.write_record(header).map_err(csv_err)?;
    }
    let mut worst = 0u8;
    for (index, point) in points.iter().enumerate() {
        let outcome = config.run_at(point).and_then(|run| execute(&run));
        let (status, value, uncertainty, error) = match &outcome {
            Ok(record) => {
                writeln!(jsonl, "{}", record.to_json_line()).map_err(io)?;
                let (v, u) = headline(record);
                ("ok".to_string(), v, u, String::new())
            }
            Err(e) => {
                worst = worst.max(e.exit_code());
                eprintln!("sweep point {index}: {e}");
                ("error".to_string(), String::new(), String::new(), e.to_string())
            }
        };
        if let Some(w) = csv.as_mut() {
            let row = [index.to_string(), config.subcommand.clone()]
                .into_iter()
                .chain(point.iter().map(|(_, v)| cell(v)))
                .chain([status, value, uncertainty, error]);
            w.write_record(row).map_err(csv_err)?;
        }
    }
    if let Some(mut w) = csv {
        w.flush().map_err(io)?;
    }
    Ok(worst)
}
