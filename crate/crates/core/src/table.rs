//! Keyed numeric tables: the uniform output format of every analysis step.

use std::fmt;
use std::path::Path;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Text(String),
    /// Undefined result (excluded entity, zero variance, 0/0). Empty CSV
    /// cell, JSON `null`.
    Missing,
}

impl Value {
    pub fn opt(x: Option<f64>) -> Self {
        x.map_or(Value::Missing, Value::Real)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Int(i) => Some(i as f64),
            Value::Real(x) => Some(x),
            _ => None,
        }
    }

    fn infer(cell: &str) -> Self {
        if cell.is_empty() {
            Value::Missing
        } else if let Ok(i) = cell.parse::<i64>() {
            Value::Int(i)
        } else if let Ok(x) = cell.parse::<f64>() {
            Value::Real(x)
        } else {
            Value::Text(cell.to_string())
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(x) if x.is_finite() => write!(f, "{x}"),
            Value::Real(_) | Value::Missing => Ok(()),
            Value::Text(s) => f.write_str(s),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Int(i) => s.serialize_i64(*i),
            Value::Real(x) if x.is_finite() => s.serialize_f64(*x),
            Value::Real(_) | Value::Missing => s.serialize_none(),
            Value::Text(t) => s.serialize_str(t),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Real(x)
    }
}

impl From<Option<f64>> for Value {
    fn from(x: Option<f64>) -> Self {
        Value::opt(x)
    }
}

macro_rules! int_value {
    ($($t:ty),*) => {$(
        impl From<$t> for Value {
            fn from(i: $t) -> Self {
                Value::Int(i as i64)
            }
        }
    )*};
}
int_value!(i32, i64, u32, u64, usize);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl MetricTable {
    pub fn new<I, S>(columns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column, `None` for missing cells.
    pub fn numbers(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let c = self.column(name)?;
        Some(self.rows.iter().map(|r| r[c].as_f64()).collect())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(ToString::to_string))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Read any CSV, inferring integer, real, text and missing cells.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let mut table = MetricTable::new(reader.headers()?.iter());
        for rec in reader.records() {
            table.rows.push(rec?.iter().map(Value::infer).collect());
        }
        Ok(table)
    }

    /// Rows as JSON objects keyed by column name.
    pub fn to_json_records(&self) -> serde_json::Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.clone(), serde_json::to_value(v).unwrap_or(serde_json::Value::Null)))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::Value::Array(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_cells_and_inference() {
        let mut t = MetricTable::new(["id", "n", "x", "y"]);
        t.push(vec!["a".into(), 3usize.into(), 0.25.into(), Value::Missing]);
        t.push(vec!["b".into(), 4usize.into(), f64::NAN.into(), 1.5.into()]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        t.write_csv(&path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "id,n,x,y\na,3,0.25,\nb,4,,1.5\n");
        let back = MetricTable::read_csv(&path).unwrap();
        assert_eq!(back.rows[0], vec![Value::Text("a".into()), Value::Int(3), Value::Real(0.25), Value::Missing]);
        assert_eq!(back.numbers("y").unwrap(), vec![None, Some(1.5)]);
    }

    #[test]
    fn json_records() {
        let mut t = MetricTable::new(["id", "x"]);
        t.push(vec!["a".into(), Value::Missing]);
        assert_eq!(t.to_json_records().to_string(), r#"[{"id":"a","x":null}]"#);
    }
}
