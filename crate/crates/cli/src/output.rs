//! JSON and CSV renderings of a [`Report`].

use serde_json::Value;

use crate::{CliError, Report};

pub fn to_json(report: &Report) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| CliError::Invalid(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Sweeps become long-form rows (one per grid point and method); every other
/// report is flattened to `path,value` pairs.
pub fn to_csv(report: &Report) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let value = serde_json::to_value(report).map_err(|e| CliError::Invalid(e.to_string()))?;
    let csv_err = |e: csv::Error| CliError::Invalid(e.to_string());
    match value["result"]["rows"].as_array() {
        Some(rows) if report.command == "sweep" => {
            let cols = ["index", "axis_value", "method", "status", "log_rc_inv", "rc", "note"];
            w.write_record(cols).map_err(csv_err)?;
            for row in rows {
                w.write_record(cols.iter().map(|c| scalar(&row[*c]))).map_err(csv_err)?;
            }
        }
        _ => {
            w.write_record(["path", "value"]).map_err(csv_err)?;
            let mut out = Vec::new();
            flatten("", &value, &mut out);
            for (k, v) in out {
                w.write_record([k, v]).map_err(csv_err)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Invalid(e.to_string()))
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&join(k), x, out);
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&join(&i.to_string()), x, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}
