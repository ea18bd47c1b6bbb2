use std::io::Write;
use std::path::Path;

use serde_json::{Map, Number, Value};

use crate::CliError;

/// One field of an output record.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn csv_field(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) => Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Bool(v) => Value::Bool(*v),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_field))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<(), CliError> {
        let records: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (k, v) in self.header.iter().zip(row) {
                    m.insert(k.clone(), v.json());
                }
                Value::Object(m)
            })
            .collect();
        serde_json::to_writer_pretty(&mut out, &records)?;
        writeln!(out)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Tables produced by a command (the first one is primary) and plot scripts.
#[derive(Debug, Default)]
pub struct Output {
    pub tables: Vec<Table>,
    pub scripts: Vec<(String, String)>,
}

/// Without `out_dir` only the primary table goes to stdout. With it, every
/// table is written as `<name>.<ext>`; plot scripts read the CSV files and are
/// only written in CSV mode.
pub fn emit(output: &Output, format: Format, out_dir: Option<&Path>) -> Result<(), CliError> {
    let Some(dir) = out_dir else {
        let mut buf = Vec::new();
        match format {
            Format::Csv => output.tables[0].write_csv(&mut buf)?,
            Format::Json => output.tables[0].write_json(&mut buf)?,
        }
        // a closed pipe (e.g. `| head`) is not an error
        return match std::io::stdout().lock().write_all(&buf) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => Ok(r?),
        };
    };
    std::fs::create_dir_all(dir)?;
    for t in &output.tables {
        let file = std::fs::File::create(dir.join(format!("{}.{}", t.name, format.extension())))?;
        let buf = std::io::BufWriter::new(file);
        match format {
            Format::Csv => t.write_csv(buf)?,
            Format::Json => t.write_json(buf)?,
        }
    }
    if format == Format::Csv {
        for (name, body) in &output.scripts {
            std::fs::write(dir.join(name), body)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_fields_roundtrip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let s = Cell::Float(v).csv_field();
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(Cell::Empty.csv_field(), "");
        assert_eq!(Cell::Float(f64::NAN).json(), Value::Null);
    }

    #[test]
    fn json_keeps_column_order() {
        let mut t = Table::new("t", &["b", "a"]);
        t.push(vec![1.0.into(), "x".into()]);
        let mut buf = Vec::new();
        t.write_json(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.find("\"b\"").unwrap() < s.find("\"a\"").unwrap());
    }
}
