//! Report assembly and serialisation.
//!
//! Floating-point values are written in scientific notation with 17
//! significant digits; non-finite values become `null`. Object keys keep
//! insertion order, so equal inputs give byte-identical files.

use landsberg_core::tensor::Tensor;
use serde_json::{Map, Number, Value};

use crate::config::Format;

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn num(v: f64) -> Value {
    if !v.is_finite() {
        return Value::Null;
    }
    let v = if v == 0.0 { 0.0 } else { v };
    let text = format!("{v:.16e}");
    Value::Number(text.parse::<Number>().expect("formatted float is valid JSON"))
}

pub fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

/// Nested arrays in row-major order.
pub fn tensor(t: &Tensor) -> Value {
    fn build(data: &[f64], dim: usize, rank: usize) -> Value {
        if rank == 1 {
            return nums(data);
        }
        let stride = data.len() / dim;
        Value::Array((0..dim).map(|i| build(&data[i * stride..(i + 1) * stride], dim, rank - 1)).collect())
    }
    if t.rank() == 0 {
        return num(t.data()[0]);
    }
    build(t.data(), t.dim(), t.rank())
}

/// Rewrites every non-integer number with 17 significant digits.
pub fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => num(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

/// Builder for JSON objects with insertion-ordered keys.
#[derive(Debug, Default, Clone)]
pub struct Obj(Map<String, Value>);

impl Obj {
    pub fn new() -> Self {
        Self(Map::new())
    }

    pub fn set(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.0.insert(key.to_string(), v.into());
        self
    }

    pub fn f(self, key: &str, v: f64) -> Self {
        self.set(key, num(v))
    }

    pub fn push(&mut self, key: &str, v: impl Into<Value>) {
        self.0.insert(key.to_string(), v.into());
    }
}

impl From<Obj> for Value {
    fn from(o: Obj) -> Self {
        Value::Object(o.0)
    }
}

/// A flat table for CSV output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn cell(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

/// Column name of one tensor entry, indices 1-based: `L_112`. Indices are
/// separated by `_` when the dimension exceeds nine.
pub fn column(prefix: &str, idx: &[usize], dim: usize) -> String {
    if idx.is_empty() {
        return prefix.to_string();
    }
    let parts: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
    let sep = if dim > 9 { "_" } else { "" };
    format!("{prefix}_{}", parts.join(sep))
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends tensor entries as columns of a single-row table.
    pub fn wide(&mut self, prefix: &str, t: &Tensor) {
        if self.rows.is_empty() {
            self.rows.push(Vec::new());
        }
        t.for_each(|idx, v| {
            self.header.push(column(prefix, idx, t.dim()));
            self.rows[0].push(cell(v));
        });
    }

    pub fn wide_vec(&mut self, prefix: &str, v: &[f64]) {
        self.wide(prefix, &Tensor::from_fn(v.len(), 1, |i| v[i[0]]));
    }

    pub fn wide_scalar(&mut self, name: &str, v: f64) {
        if self.rows.is_empty() {
            self.rows.push(Vec::new());
        }
        self.header.push(name.to_string());
        self.rows[0].push(cell(v));
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// A finished command result, renderable as JSON or CSV.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub payload: Value,
    pub table: Table,
}

impl Report {
    pub fn json(&self) -> Value {
        Obj::new()
            .set(
                "tool",
                Obj::new().set("name", TOOL_NAME).set("version", TOOL_VERSION),
            )
            .set("command", self.command)
            .set("config", normalize(self.config.clone()))
            .set(self.command, self.payload.clone())
            .into()
    }

    pub fn render(&self, format: Format) -> Result<String, csv::Error> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json()).expect("report serialises");
                s.push('\n');
                Ok(s)
            }
            Format::Csv => self.table.to_csv(),
        }
    }
}
