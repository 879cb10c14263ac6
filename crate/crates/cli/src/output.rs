//! Deterministic tabular output. Floats are written in scientific notation
//! with a fixed number of significant digits so that identical inputs give
//! byte-identical files.

use std::fmt::Write as _;

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Int(i64),
    Bool(bool),
    Str(String),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Bool(x)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Str(x.to_string())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Str(x)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(x: Option<T>) -> Self {
        x.map(Into::into).unwrap_or(Value::Num(f64::NAN))
    }
}

/// `digits` significant digits in scientific notation; non-finite values
/// are spelled `nan`, `inf`, `-inf`.
pub fn format_number(x: f64, digits: usize) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        // Normalize -0 so that signed zeros do not break byte identity.
        let x = if x == 0.0 { 0.0 } else { x };
        format!("{:.*e}", digits - 1, x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }
}

fn csv_field(v: &Value, digits: usize) -> String {
    match v {
        Value::Num(x) => format_number(*x, digits),
        Value::Int(i) => i.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Str(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::Str(s) => s.clone(),
    }
}

fn json_value(v: &Value, digits: usize) -> String {
    match v {
        Value::Num(x) if x.is_finite() => format_number(*x, digits),
        Value::Num(x) => serde_json::to_string(&format_number(*x, digits)).unwrap(),
        Value::Int(i) => i.to_string(),
        Value::Bool(b) => b.to_string(),
        Value::Str(s) => serde_json::to_string(s).unwrap(),
    }
}

pub fn header_line(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => format!("{}\n", table.columns.join(",")),
        Format::Json => String::new(),
    }
}

/// One serialized record, newline-terminated. JSON records are single-line
/// objects.
pub fn row_line(columns: &[&str], row: &[Value], format: Format, digits: usize) -> String {
    match format {
        Format::Csv => {
            let fields: Vec<String> = row.iter().map(|v| csv_field(v, digits)).collect();
            format!("{}\n", fields.join(","))
        }
        Format::Json => {
            let mut s = String::from("{");
            for (i, (c, v)) in columns.iter().zip(row).enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                write!(s, "{}: {}", serde_json::to_string(c).unwrap(), json_value(v, digits)).unwrap();
            }
            s.push_str("}\n");
            s
        }
    }
}

/// Assemble a document from pre-rendered record lines.
pub fn assemble(command: &str, table: &Table, lines: &[String], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = header_line(table, format);
            for l in lines {
                out.push_str(l);
            }
            out
        }
        Format::Json => {
            let mut out = format!("{{\n  \"command\": {},\n  \"records\": [", serde_json::to_string(command).unwrap());
            for (i, l) in lines.iter().enumerate() {
                out.push_str(if i == 0 { "\n    " } else { ",\n    " });
                out.push_str(l.trim_end_matches('\n'));
            }
            out.push_str(if lines.is_empty() { "]\n}\n" } else { "\n  ]\n}\n" });
            out
        }
    }
}

pub fn render(command: &str, table: &Table, format: Format, digits: usize) -> String {
    let lines: Vec<String> = table.rows.iter().map(|r| row_line(&table.columns, r, format, digits)).collect();
    assemble(command, table, &lines, format)
}
