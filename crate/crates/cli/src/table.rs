//! Result tables written as `results.csv`.

use std::fmt;
use std::path::Path;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    F(f64),
    I(i64),
    B(bool),
    S(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // Shortest representation that round-trips.
            Value::F(v) => write!(f, "{v:?}"),
            Value::I(v) => write!(f, "{v}"),
            Value::B(v) => write!(f, "{v}"),
            Value::S(v) => f.write_str(v),
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::F(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::I(v as i64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::I(v as i64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::B(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::S(v.to_string())
    }
}

impl From<Option<f64>> for Value {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Value::S(String::new()), Value::F)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> CliResult<usize> {
        self.columns.iter().position(|c| c == name).ok_or_else(|| CliError::Input(format!("no column `{name}` in table")))
    }

    /// Numeric values of a column; non-numeric cells become `NaN`.
    pub fn column(&self, name: &str) -> CliResult<Vec<f64>> {
        let i = self.column_index(name)?;
        Ok(self
            .rows
            .iter()
            .map(|r| match &r[i] {
                Value::F(v) => *v,
                Value::I(v) => *v as f64,
                Value::B(v) => f64::from(u8::from(*v)),
                Value::S(s) => s.parse().unwrap_or(f64::NAN),
            })
            .collect())
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(&self.columns)?;
        for r in &self.rows {
            wtr.write_record(r.iter().map(|v| v.to_string()))?;
        }
        let bytes = wtr.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }

    /// Reads a table; every cell is kept as text and parsed on demand.
    pub fn read_csv(path: &Path) -> CliResult<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let columns = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            rows.push(rec?.iter().map(|s| Value::S(s.to_string())).collect());
        }
        Ok(Self { columns, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        let mut t = Table::new(&["x", "ok"]);
        t.push(vec![0.1.into(), true.into()]);
        t.push(vec![(1.0 / 3.0).into(), false.into()]);
        let csv = t.to_csv().unwrap();
        assert_eq!(csv, "x,ok\n0.1,true\n0.3333333333333333,false\n");
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        std::fs::write(&p, csv).unwrap();
        let back = Table::read_csv(&p).unwrap();
        assert_eq!(back.column("x").unwrap(), vec![0.1, 1.0 / 3.0]);
        assert!(back.column("ok").unwrap()[0].is_nan());
    }
}
