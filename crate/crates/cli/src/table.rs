//! Plot-ready tables: CSV with `# key = value` metadata comments and the
//! exact header row, or JSON mirroring the columns as arrays. Rendering is
//! deterministic; CSV floats carry 12 significant digits.

use std::io::Write;

use crate::config::{OutFormat, SweepConfig};
use crate::CliError;

pub enum Cell {
    Int(usize),
    Float(f64),
    Text(&'static str),
    Empty,
}

impl Cell {
    pub fn opt(value: Option<f64>) -> Self {
        match value {
            Some(v) => Cell::Float(v),
            None => Cell::Empty,
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => sig12(*v),
            Cell::Text(s) => (*s).to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(v) => (*v).into(),
            Cell::Float(v) => serde_json::Number::from_f64(*v)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            Cell::Text(s) => (*s).into(),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

/// Scientific notation with 12 significant digits.
pub fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

pub struct Table {
    columns: &'static [&'static str],
    rows: Vec<Vec<Cell>>,
    meta: Vec<(&'static str, String)>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &'static str, value: String) {
        self.meta.push((key, value));
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.columns.len(), "row width mismatch");
        self.rows.push(cells);
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.meta {
            out.push_str(&format!("# {key} = {value}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let mut root = serde_json::Map::new();
        for (key, value) in &self.meta {
            root.insert((*key).into(), serde_json::Value::String(value.clone()));
        }
        let mut columns = serde_json::Map::new();
        for (i, name) in self.columns.iter().enumerate() {
            let values: Vec<serde_json::Value> = self.rows.iter().map(|r| r[i].json()).collect();
            columns.insert((*name).into(), serde_json::Value::Array(values));
        }
        root.insert("columns".into(), serde_json::Value::Object(columns));
        let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(root))
            .expect("tables serialize");
        text.push('\n');
        text
    }

    /// Render in the configured format and write to the configured
    /// destination (standard output when no path is set).
    pub fn write(&self, cfg: &SweepConfig) -> Result<(), CliError> {
        let text = match cfg.format {
            OutFormat::Csv => self.render_csv(),
            OutFormat::Json => self.render_json(),
        };
        match &cfg.output {
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::config(format!("cannot write to standard output: {e}"))),
            Some(path) => std::fs::write(path, text)
                .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display()))),
        }
    }
}
