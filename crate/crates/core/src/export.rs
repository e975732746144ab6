//! Front export and re-import.
//!
//! One record per archive member, field order `id, f_1..f_n, encoding`.
//! CSV carries a header row naming each criterion; JSON is an array of
//! objects with the same fields. All output is UTF-8 with '.' decimal
//! separator and '\n' line endings, and objective values are written with
//! enough digits to round-trip exactly.

use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("malformed front file: {0}")]
    Malformed(String),
    #[error("json parse error: {0}")]
    Json(#[from] serde_json::Error),
}

/// One exported front record. `encoding` is the problem-specific solution in
/// its textual form; it never contains commas, quotes or newlines.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontRow {
    pub id: u64,
    pub objectives: Vec<f64>,
    pub encoding: String,
}

/// Shortest representation that parses back to the same f64.
pub fn fmt_f64(value: f64) -> String {
    format!("{value}")
}

pub fn to_csv(criteria: &[String], rows: &[FrontRow]) -> String {
    let mut out = String::new();
    out.push_str("id");
    for name in criteria {
        out.push(',');
        out.push_str(name);
    }
    out.push_str(",encoding\n");
    for row in rows {
        out.push_str(&row.id.to_string());
        for value in &row.objectives {
            out.push(',');
            out.push_str(&fmt_f64(*value));
        }
        out.push(',');
        out.push_str(&row.encoding);
        out.push('\n');
    }
    out
}

pub fn to_json(criteria: &[String], rows: &[FrontRow]) -> String {
    // Rendered by hand to keep the exact field order id, f_1..f_n, encoding.
    let mut out = String::from("[\n");
    for (i, row) in rows.iter().enumerate() {
        out.push_str("  {");
        out.push_str(&format!("\"id\": {}", row.id));
        for (name, value) in criteria.iter().zip(&row.objectives) {
            out.push_str(&format!(
                ", {}: {}",
                serde_json::to_string(name).unwrap(),
                fmt_f64(*value)
            ));
        }
        out.push_str(&format!(
            ", \"encoding\": {}",
            serde_json::to_string(&row.encoding).unwrap()
        ));
        out.push('}');
        if i + 1 < rows.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("]\n");
    out
}

/// Parses a front CSV produced by [`to_csv`]. Returns criteria names and rows.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<FrontRow>), ExportError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| ExportError::Malformed("empty file".into()))?;
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() < 3 || fields[0] != "id" || *fields.last().unwrap() != "encoding" {
        return Err(ExportError::Malformed(format!(
            "header must be id,<criteria..>,encoding, got {header:?}"
        )));
    }
    let criteria: Vec<String> = fields[1..fields.len() - 1]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != fields.len() {
            return Err(ExportError::Malformed(format!(
                "line {}: expected {} fields, got {}",
                lineno + 2,
                fields.len(),
                parts.len()
            )));
        }
        let id: u64 = parts[0]
            .parse()
            .map_err(|e| ExportError::Malformed(format!("line {}: bad id: {e}", lineno + 2)))?;
        let mut objectives = Vec::with_capacity(criteria.len());
        for part in &parts[1..parts.len() - 1] {
            let value: f64 = part.parse().map_err(|e| {
                ExportError::Malformed(format!("line {}: bad value {part:?}: {e}", lineno + 2))
            })?;
            if !value.is_finite() {
                return Err(ExportError::Malformed(format!(
                    "line {}: non-finite objective {part:?}",
                    lineno + 2
                )));
            }
            objectives.push(value);
        }
        rows.push(FrontRow {
            id,
            objectives,
            encoding: parts[parts.len() - 1].to_string(),
        });
    }
    Ok((criteria, rows))
}

/// Parses a front JSON produced by [`to_json`].
pub fn parse_json(text: &str) -> Result<(Vec<String>, Vec<FrontRow>), ExportError> {
    let value: Value = serde_json::from_str(text)?;
    let array = value
        .as_array()
        .ok_or_else(|| ExportError::Malformed("expected a JSON array".into()))?;
    let mut criteria: Vec<String> = Vec::new();
    let mut rows = Vec::new();
    for (i, item) in array.iter().enumerate() {
        let obj = item
            .as_object()
            .ok_or_else(|| ExportError::Malformed(format!("row {i}: expected an object")))?;
        let id = obj
            .get("id")
            .and_then(Value::as_u64)
            .ok_or_else(|| ExportError::Malformed(format!("row {i}: missing id")))?;
        let encoding = obj
            .get("encoding")
            .and_then(Value::as_str)
            .ok_or_else(|| ExportError::Malformed(format!("row {i}: missing encoding")))?
            .to_string();
        let names: Vec<String> = obj
            .keys()
            .filter(|k| *k != "id" && *k != "encoding")
            .cloned()
            .collect();
        if criteria.is_empty() {
            criteria = names;
        } else if criteria.len() != names.len() {
            return Err(ExportError::Malformed(format!(
                "row {i}: inconsistent criteria"
            )));
        }
        let mut objectives = Vec::with_capacity(criteria.len());
        for name in &criteria {
            let v = obj.get(name).and_then(Value::as_f64).ok_or_else(|| {
                ExportError::Malformed(format!("row {i}: missing criterion {name}"))
            })?;
            objectives.push(v);
        }
        rows.push(FrontRow {
            id,
            objectives,
            encoding,
        });
    }
    Ok((criteria, rows))
}
