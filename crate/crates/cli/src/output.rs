//! Tabular output in CSV or JSON-lines form.

use std::io::Write;
use std::path::Path;

use serde::Deserialize;
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            // 17 significant digits round-trip every f64
            Cell::Real(x) => format!("{x:.16e}"),
            Cell::Int(k) => k.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Real(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(k) => Value::from(*k),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(k: usize) -> Self {
        Cell::Int(k as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Index of a column by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn write<W: Write>(&self, out: W, format: Format) -> Result<(), CliError> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.columns).map_err(CliError::output)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv)).map_err(CliError::output)?;
                }
                w.flush().map_err(CliError::output)?;
            }
            Format::Jsonl => {
                let mut out = std::io::BufWriter::new(out);
                for row in &self.rows {
                    let obj: Map<String, Value> =
                        self.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                    writeln!(out, "{}", Value::Object(obj)).map_err(CliError::output)?;
                }
                out.flush().map_err(CliError::output)?;
            }
        }
        Ok(())
    }

    pub fn write_to_path(&self, path: &Path, format: Format) -> Result<(), CliError> {
        let f = std::fs::File::create(path).map_err(|e| CliError::output(format!("{}: {e}", path.display())))?;
        self.write(f, format)
    }
}

/// Reads a CSV file written by [`Table::write`] back as header and string rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    let header = r.headers().map_err(|e| CliError::parse(e.to_string()))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(|e| CliError::parse(e.to_string()))?.iter().map(String::from).collect());
    }
    Ok((header, rows))
}

/// Ordered key-value summary of a command, printed as one JSON object.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary(pub Map<String, Value>);

impl Summary {
    pub fn new(command: &str) -> Self {
        let mut m = Map::new();
        m.insert("command".into(), Value::from(command));
        Summary(m)
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.0.insert(key.into(), value.into());
        self
    }

    pub fn real(&mut self, key: &str, x: f64) -> &mut Self {
        self.set(key, serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number))
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.0.get(key)
    }
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", Value::Object(self.0.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_reals_round_trip() {
        let xs = [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, std::f64::consts::PI];
        let mut t = Table::new(["x", "label"]);
        for x in xs {
            t.push(vec![x.into(), Cell::Text("{1,2|3}".into())]);
        }
        let mut buf = Vec::new();
        t.write(&mut buf, Format::Csv).unwrap();
        let mut r = csv::Reader::from_reader(buf.as_slice());
        for (rec, x) in r.records().zip(xs) {
            let rec = rec.unwrap();
            assert_eq!(rec[0].parse::<f64>().unwrap(), x);
            assert_eq!(&rec[1], "{1,2|3}");
        }
    }

    #[test]
    fn jsonl_keeps_column_order() {
        let mut t = Table::new(["tau", "a", "b"]);
        t.push(vec![1.0.into(), 2usize.into(), true.into()]);
        let mut buf = Vec::new();
        t.write(&mut buf, Format::Jsonl).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "{\"tau\":1.0,\"a\":2,\"b\":true}\n");
    }
}
