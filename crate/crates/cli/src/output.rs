use std::fs;
use std::path::Path;

use serde_json::{Map, Value};
use wfr_core::{Error, Result};

/// Version of the CSV and JSON layouts.
pub const ARTIFACT_VERSION: u32 = 1;

/// A CSV table; every cell is already formatted.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }
}

/// Result of one experiment: its table, its summary fields and the verdict.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: &'static str,
    pub table: Table,
    /// Command-specific summary fields.
    pub summary: Map<String, Value>,
    pub failures: Vec<String>,
    pub svg: Option<String>,
}

impl Outcome {
    pub fn new(name: &'static str, table: Table) -> Self {
        Outcome {
            name,
            table,
            summary: Map::new(),
            failures: Vec::new(),
            svg: None,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.summary.insert(key.to_string(), value.into());
    }

    pub fn fail(&mut self, why: impl Into<String>) {
        self.failures.push(why.into());
    }

    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }

    /// The JSON summary with the common fields merged in.
    pub fn summary_json(&self, echo: &Value) -> String {
        let mut m = self.summary.clone();
        m.insert("artifact_version".into(), ARTIFACT_VERSION.into());
        m.insert("command".into(), self.name.into());
        m.insert("config_echo".into(), echo.clone());
        m.insert("pass".into(), self.pass().into());
        m.insert("failures".into(), self.failures.clone().into());
        let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("plain JSON values");
        s.push('\n');
        s
    }

    /// Writes `<name>.csv`, `<name>.json` and, if present, `<name>.svg`.
    pub fn write(&self, dir: &Path, echo: &Value) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let put = |ext: &str, body: &str| {
            let path = dir.join(format!("{}.{ext}", self.name));
            fs::write(&path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        };
        put("csv", &self.table.to_csv())?;
        put("json", &self.summary_json(echo))?;
        if let Some(svg) = &self.svg {
            put("svg", svg)?;
        }
        Ok(())
    }
}

/// Shortest round-trip decimal form, so the CSV carries the exact double.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// A JSON number, or `null` when not finite.
pub fn jnum(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}
