use paley_esh::bounds::Cell;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{CliError, SCHEMA_VERSION};

pub fn fixed4(v: f64) -> String {
    format!("{v:.4}")
}

/// Four decimals, `-` when inapplicable, `error` when the computation failed.
pub fn cell(c: &Cell) -> String {
    match c {
        Cell::Value { value, .. } => fixed4(*value),
        Cell::Skipped { .. } => "-".into(),
        Cell::Failed { .. } => "error".into(),
    }
}

/// Integer-valued cell such as `α`.
pub fn int_cell(c: &Cell) -> String {
    match c {
        Cell::Value { value, .. } => format!("{}", value.round() as i64),
        other => cell(other),
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Runtime(format!("serialization failed: {e}")))
}

/// The versioned envelope every JSON document shares.
pub fn envelope(command: &str, seed: u64, result: Value) -> String {
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "tool": "paley-esh",
        "command": command,
        "seed": seed,
        "result": result,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn header(command: &str, seed: u64) -> String {
    format!("# paley-esh {command} seed={seed}\n")
}

pub fn csv(rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(r)
            .map_err(|e| CliError::Runtime(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Runtime(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Runtime(format!("csv: {e}")))
}

/// Right-aligned columns separated by two spaces.
pub fn aligned(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{:>w$}", s, w = widths[c]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
