//! Tabular output shared by every command.
//!
//! CSV floats are written in scientific notation with 17 significant digits,
//! enough to recover every `f64` bit-exactly. JSON output is one document of
//! the form `{"command", "columns", "rows"}` where each row is an object keyed
//! by column name; it conforms to `schema/output.schema.json`.

use std::io::Write;

use serde_json::{Map, Value};

use crate::spec::OutputFormat;
use crate::CliError;

/// One table entry.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    /// Real number.
    Float(f64),
    /// Count.
    Int(u64),
    /// Free text such as a status.
    Text(String),
    /// Not applicable for this row.
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl Cell {
    fn csv_field(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json_value(&self) -> Value {
        match self {
            // Non-finite values have no JSON representation.
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

/// `{:.16e}`: one leading digit plus 16 decimals.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// A titled table with a fixed column list.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    /// Command that produced the table.
    pub command: String,
    /// Column names, in output order.
    pub columns: Vec<&'static str>,
    /// Rows; each has exactly `columns.len()` cells.
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    /// Empty table with the given header.
    pub fn new(command: &str, columns: &[&'static str]) -> Table {
        Table {
            command: command.to_owned(),
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    /// Appends a row.
    ///
    /// # Panics
    /// When the row length does not match the header.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    /// Writes CSV with a header row and LF line endings.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_field))?;
        }
        w.flush()?;
        Ok(())
    }

    /// The JSON document form.
    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| ((*c).to_owned(), v.json_value()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        serde_json::json!({
            "command": self.command,
            "columns": self.columns,
            "rows": Value::Array(rows),
        })
    }

    /// Writes pretty-printed JSON followed by a newline.
    pub fn write_json<W: Write>(&self, mut out: W) -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut out, &self.to_json())?;
        out.write_all(b"\n")?;
        Ok(())
    }

    /// Writes in the requested format.
    pub fn write<W: Write>(&self, format: OutputFormat, out: W) -> Result<(), CliError> {
        match format {
            OutputFormat::Csv => self.write_csv(out),
            OutputFormat::Json => self.write_json(out),
        }
    }
}
