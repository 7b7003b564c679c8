//! Tabular output shared by every subcommand.
//!
//! CSV: comma separated, `.` decimal point, one header row, floats rendered
//! with 17 significant digits (`{:.16e}`), which round-trips exactly.
//! JSON: `{"schema": "clickstats.table", "version": 1, "command", "columns", "rows"}`
//! with each row an object keyed by column name.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::metrics::Metric;

pub const SCHEMA_NAME: &str = "clickstats.table";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Metric(Metric),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Metric(m) => m.to_string(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(v) => json!(v.to_string()),
            Cell::Text(s) => json!(s),
            Cell::Metric(Metric::Value(v)) if v.is_finite() => json!(v),
            Cell::Metric(m) => json!(m.to_string()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<Metric> for Cell {
    fn from(m: Metric) -> Self {
        Cell::Metric(m)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self, command: &str) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(r.iter().map(Cell::to_json))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        json!({
            "schema": SCHEMA_NAME,
            "version": SCHEMA_VERSION,
            "command": command,
            "columns": self.columns,
            "rows": rows,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Undefined;

    #[test]
    fn float_rendering_round_trips() {
        for v in [0.1, 1.0 / 3.0, 2.528482235314231, 1e-300, 123456.789, 0.0] {
            let s = Cell::Float(v).render();
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(Cell::Float(0.5).render(), "5.0000000000000000e-1");
    }

    #[test]
    fn csv_and_json_shapes() {
        let mut t = Table::new(["k", "p", "q"]);
        t.push(vec![
            Cell::Int(0),
            Cell::Float(0.25),
            Cell::Metric(Metric::Undefined(Undefined::ZeroMean)),
        ]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "k,p,q\n0,2.5000000000000000e-1,undefined(zero_mean)\n"
        );
        let j = t.to_json("test");
        assert_eq!(j["rows"][0]["p"], json!(0.25));
        assert_eq!(j["rows"][0]["q"], json!("undefined(zero_mean)"));
        assert_eq!(j["version"], json!(1));
    }
}
