use std::io::Write;
use std::path::{Path, PathBuf};

use relbound::BoundCurve;
use serde_json::Value;
use tempfile::NamedTempFile;

use crate::error::CliError;

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(CliError::io(dir))?;
    tmp.write_all(bytes).map_err(CliError::io(path))?;
    tmp.persist(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

/// The JSON report written beside a CSV output.
pub fn report_path(out: &Path) -> Result<PathBuf, CliError> {
    let json = out.with_extension("json");
    if json == out {
        return Err(CliError::Usage(format!("{} is reserved for the JSON report; use a .csv name", out.display())));
    }
    Ok(json)
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn write_curves(path: &Path, curves: &[BoundCurve]) -> Result<(), CliError> {
    let mut bytes = Vec::new();
    for (i, c) in curves.iter().enumerate() {
        let mut part = Vec::new();
        c.write_csv(&mut part)?;
        // one header for the whole file
        let skip = if i == 0 { 0 } else { part.iter().position(|&b| b == b'\n').map_or(part.len(), |k| k + 1) };
        bytes.extend_from_slice(&part[skip..]);
    }
    write_atomic(path, &bytes)
}

/// Rows of plain numeric columns, `inf` for infinities.
pub fn write_table(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Core(relbound::Error::Format(e.to_string()));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| relbound::infinite::format(v))).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Core(relbound::Error::Format(e.to_string())))?;
    write_atomic(path, &bytes)
}

/// JSON number, or `"inf"`/`"-inf"`; NaN becomes null.
pub fn num(v: f64) -> Value {
    if v.is_infinite() {
        Value::String(relbound::infinite::format(v))
    } else {
        serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
    }
}

pub fn nums(vs: &[f64]) -> Value {
    Value::Array(vs.iter().map(|&v| num(v)).collect())
}
