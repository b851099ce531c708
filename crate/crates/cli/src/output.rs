use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use serde_json::{Map, Value};

#[derive(Clone, Debug)]
pub enum Cell {
    Int(i64),
    Float(f64),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{:.16e}", v + 0.0),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => Value::from(*v),
        }
    }
}

/// Rows with a fixed header, rendered as CSV or as a JSON array of objects.
#[derive(Clone, Debug)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .header
                        .iter()
                        .zip(row)
                        .map(|(h, c)| (h.to_string(), c.json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Destination of the primary artifact and its JSON sidecar: files
/// `<prefix>.csv|json` and `<prefix>.summary.json`, or stdout and stderr.
pub struct Sink {
    pub prefix: Option<PathBuf>,
    pub format: Format,
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialise");
    s.push('\n');
    s
}

impl Sink {
    fn write(&self, suffix: &str, text: &str, fallback_stdout: bool) -> Result<(), String> {
        match &self.prefix {
            Some(prefix) => {
                let mut name = prefix.clone().into_os_string();
                name.push(suffix);
                let path = PathBuf::from(name);
                std::fs::write(&path, text).map_err(|e| format!("cannot write `{}`: {e}", path.display()))
            }
            None if fallback_stdout => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| e.to_string()),
            None => std::io::stderr()
                .write_all(text.as_bytes())
                .map_err(|e| e.to_string()),
        }
    }

    pub fn table(&self, t: &Table) -> Result<(), String> {
        match self.format {
            Format::Csv => self.write(".csv", &t.to_csv(), true),
            Format::Json => self.write(".json", &pretty(&t.to_json()), true),
        }
    }

    pub fn json(&self, v: &Value) -> Result<(), String> {
        self.write(".json", &pretty(v), true)
    }

    pub fn summary(&self, v: &Value) -> Result<(), String> {
        self.write(".summary.json", &pretty(v), false)
    }
}
