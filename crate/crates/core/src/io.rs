//! Plot-ready tables: CSV with a `#` metadata header, or a JSON mirror.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    /// Ordered `key: value` lines written ahead of the header.
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { metadata: Vec::new(), columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.metadata.push((key.into(), value.to_string()));
        self
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in &self.metadata {
            for (i, line) in v.lines().enumerate() {
                if i == 0 {
                    writeln!(out, "# {k}: {line}")?;
                } else {
                    writeln!(out, "#   {line}")?;
                }
            }
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let mut meta = Map::new();
        for (k, v) in &self.metadata {
            meta.insert(k.clone(), Value::String(v.clone()));
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(|&v| json_number(v)).collect()))
            .collect();
        json!({ "metadata": meta, "columns": self.columns, "rows": rows })
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 output")
    }
}

fn json_number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn csv_err(e: csv::Error) -> crate::error::Error {
    std::io::Error::other(e.to_string()).into()
}
