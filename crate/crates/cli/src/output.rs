//! Output files: tables in the selected format and two-column `.dat` curves.

use std::fmt;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
    Dat,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "dat" => Ok(Self::Dat),
            other => Err(format!("unknown format '{other}' (csv|json|dat)")),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
            Self::Dat => "dat",
        })
    }
}

/// A rectangular table of JSON scalars.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.iter().map(cell).collect::<Vec<_>>().join(","));
        }
        out
    }

    /// Whitespace-separated, no header.
    pub fn to_dat(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.iter().map(cell).collect::<Vec<_>>().join(" "));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let doc = serde_json::json!({ "columns": self.columns, "rows": self.rows });
        serde_json::to_string_pretty(&doc).expect("tables serialise") + "\n"
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
            Format::Dat => self.to_dat(),
        }
    }
}

/// Number cell; non-finite values become `null`.
pub fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn opt_num(v: Option<f64>) -> Value {
    v.map_or(Value::Null, num)
}

/// The output directory of one run and the files written to it.
#[derive(Debug)]
pub struct Output {
    pub dir: PathBuf,
    pub format: Format,
    pub written: Vec<String>,
}

impl Output {
    pub fn new(dir: PathBuf, format: Format) -> Result<Self, CliError> {
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::Resource(format!("cannot create output directory {}: {e}", dir.display())))?;
        Ok(Self { dir, format, written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::Resource(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Writes `stem.<format>`.
    pub fn table(&mut self, stem: &str, t: &Table) -> Result<(), CliError> {
        self.write(&format!("{stem}.{}", self.format), &t.render(self.format))
    }

    /// Writes a `.dat` curve.
    pub fn dat(&mut self, stem: &str, points: impl IntoIterator<Item = (f64, f64)>) -> Result<(), CliError> {
        self.write(&format!("{stem}.dat"), &nsf_core::analysis::to_dat(points))
    }
}
