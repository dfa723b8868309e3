//! Versioned JSON reports and flat CSV output.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

pub const SCHEMA: u32 = 1;
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub version: &'static str,
    pub command: String,
    /// Every parameter that affects the results, including seeds and tolerances.
    pub config: Value,
    pub allowances: Value,
    /// `false` when an analysis found a violated bound.
    pub pass: bool,
    pub results: Value,
    /// Only present with `--timing`, so that default reports are reproducible byte for byte.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub schema: u32,
    pub version: &'static str,
    pub command: String,
    pub error: Value,
}

/// `{kind, message, details?}` for an error.
pub fn error_object(e: &Error) -> Value {
    let mut obj = Map::new();
    obj.insert("kind".into(), json!(e.kind()));
    obj.insert("message".into(), json!(e.to_string()));
    let details = match e {
        Error::InvalidMetric(v) | Error::PerturbationBrokeMetric(v) => Some(json!({ "violations": v })),
        Error::GeodesicEnumerationCapExceeded { cap, partial } => Some(json!({ "cap": cap, "partial": partial })),
        Error::Parse { line, .. } => Some(json!({ "line": line })),
        _ => None,
    };
    if let Some(d) = details {
        obj.insert("details".into(), d);
    }
    Value::Object(obj)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Rows of plain values written with a header line.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    /// `key,value` rows for the scalar top-level fields of a JSON object.
    pub fn scalars(value: &Value) -> Self {
        let mut t = Self::new(&["key", "value"]);
        if let Value::Object(map) = value {
            for (k, v) in map {
                match v {
                    Value::Number(n) => t.push(vec![k.clone(), n.to_string()]),
                    Value::Bool(b) => t.push(vec![k.clone(), b.to_string()]),
                    Value::String(s) => t.push(vec![k.clone(), s.clone()]),
                    Value::Null => t.push(vec![k.clone(), String::new()]),
                    _ => {}
                }
            }
        }
        t
    }

    pub fn write(&self, out: &mut dyn Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Formats a float for CSV; non-finite values become empty cells.
pub fn cell(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        String::new()
    }
}
