//! CSV and JSON report writers. CSV columns are fixed per command and
//! floats print with 17 significant digits so sequential runs are
//! byte-reproducible. The JSON summary keeps every numeric finite or
//! explicitly tagged divergent.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{MzError, Result};
use crate::kernels::NormValue;

/// 17 significant digits, round-trip safe.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV table with a fixed header.
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            header: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut out = fs::File::create(path)?;
        writeln!(out, "{}", self.header.join(","))?;
        for row in &self.rows {
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// JSON encoding of a possibly-divergent value.
pub fn norm_value_json(v: &NormValue) -> serde_json::Value {
    match v {
        NormValue::Converged(x) => serde_json::json!({ "value": finite(*x), "divergent": false }),
        NormValue::Divergent { last } => {
            serde_json::json!({ "value": finite_or_null(*last), "divergent": true })
        }
    }
}

fn finite(x: f64) -> serde_json::Value {
    serde_json::Number::from_f64(x)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

fn finite_or_null(x: f64) -> serde_json::Value {
    finite(x)
}

/// Merge one command's summary into `<dir>/summary.json` (a map keyed by
/// command name), creating the file when absent.
pub fn merge_summary(dir: &Path, command: &str, summary: serde_json::Value) -> Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join("summary.json");
    let mut root: serde_json::Value = if path.exists() {
        let text = fs::read_to_string(&path)?;
        serde_json::from_str(&text).unwrap_or_else(|_| serde_json::json!({}))
    } else {
        serde_json::json!({})
    };
    match root {
        serde_json::Value::Object(ref mut map) => {
            map.insert(command.to_string(), summary);
        }
        _ => {
            root = serde_json::json!({ command: summary });
        }
    }
    let text = serde_json::to_string_pretty(&root).map_err(|e| MzError::Config(e.to_string()))?;
    fs::write(&path, text + "\n")?;
    Ok(())
}

/// Render a merged summary.json as a human-readable report.
pub fn render_summary(root: &serde_json::Value) -> String {
    let mut out = String::new();
    let map = match root.as_object() {
        Some(m) => m,
        None => return "summary.json is not an object\n".into(),
    };
    for (command, body) in map {
        out.push_str(&format!("== {command} ==\n"));
        render_value(body, 1, &mut out);
    }
    out
}

fn render_value(v: &serde_json::Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        serde_json::Value::Object(map) => {
            // divergence-tagged scalar?
            if map.len() == 2 && map.contains_key("value") && map.contains_key("divergent") {
                let tag = if map["divergent"].as_bool().unwrap_or(false) {
                    " (divergent)"
                } else {
                    ""
                };
                out.push_str(&format!("{pad}{}{}\n", map["value"], tag));
                return;
            }
            for (k, val) in map {
                match val {
                    serde_json::Value::Object(_) | serde_json::Value::Array(_) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_value(val, depth + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}{k}: {val}\n")),
                }
            }
        }
        serde_json::Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                match item {
                    serde_json::Value::Object(_) | serde_json::Value::Array(_) => {
                        out.push_str(&format!("{pad}[{i}]:\n"));
                        render_value(item, depth + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}[{i}] {item}\n")),
                }
            }
        }
        _ => out.push_str(&format!("{pad}{v}\n")),
    }
}
