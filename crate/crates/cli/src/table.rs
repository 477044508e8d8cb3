//! Result tables and their CSV / JSON forms.
//!
//! CSV: `# key: <json>` header lines carrying the metadata, then a header row
//! and one record per row. JSON: `{"meta": {...}, "rows": [{column: value}]}`
//! with the column order stored in `meta.columns`.

use std::io::Write;

use serde_json::{Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            meta: Map::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn set_meta(&mut self, key: &str, value: impl Into<Value>) {
        self.meta.insert(key.to_string(), value.into());
    }

    fn full_meta(&self) -> Map<String, Value> {
        let mut meta = self.meta.clone();
        meta.insert(
            "columns".into(),
            Value::Array(self.columns.iter().cloned().map(Value::String).collect()),
        );
        meta
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (k, v) in &self.full_meta() {
            writeln!(out, "# {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell_text))?;
        }
        w.flush()
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| Value::Object(self.columns.iter().cloned().zip(row.iter().cloned()).collect()))
            .collect();
        let mut doc = Map::new();
        doc.insert("meta".into(), Value::Object(self.full_meta()));
        doc.insert("rows".into(), Value::Array(rows));
        serde_json::to_writer_pretty(&mut out, &Value::Object(doc))?;
        writeln!(out)
    }
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// A finite float cell; non-finite values become `null` in JSON, so they are
/// written as text to keep both forms equal.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::String(x.to_string())
    }
}

pub fn int(x: impl Into<i128>) -> Value {
    let x: i128 = x.into();
    match (i64::try_from(x), u64::try_from(x)) {
        (Ok(v), _) => Value::from(v),
        (_, Ok(v)) => Value::from(v),
        _ => Value::String(x.to_string()),
    }
}

pub fn text(s: impl Into<String>) -> Value {
    Value::String(s.into())
}
