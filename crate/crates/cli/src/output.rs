use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use antenna_core::config::{OutputFormat, Provenance};
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    // 17 significant digits, so every f64 survives a round trip
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) if v.is_nan() => "nan".into(),
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
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
        Cell::Text(v.into())
    }
}

/// A rectangular result set with named columns.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    /// Array of row objects; keys come out sorted.
    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> = self.columns.iter().cloned().zip(r.iter().map(Cell::json)).collect();
                Value::Object(m)
            })
            .collect();
        canonical(&rows)
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn canonical<T: Serialize>(value: &T) -> String {
    // serde_json's default map is ordered, so going through Value sorts keys
    let v = serde_json::to_value(value).expect("serializable");
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Write `contents` to `path` through a sibling temp file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Output { path: path.to_path_buf(), message: e.to_string() };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub config_sha256: String,
    pub output: Option<PathBuf>,
    pub output_sha256: String,
    pub format: &'static str,
    pub rows: Option<usize>,
    pub wall_time_s: f64,
    pub warnings: Vec<String>,
    pub provenance: Option<Provenance>,
}

impl RunManifest {
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} {} {}: config {}, ",
            self.tool,
            self.version,
            self.subcommand,
            &self.config_sha256[..12]
        );
        match (&self.output, self.rows) {
            (Some(p), Some(n)) => {
                let _ = write!(s, "{n} rows -> {}", p.display());
            }
            (Some(p), None) => {
                let _ = write!(s, "-> {}", p.display());
            }
            (None, Some(n)) => {
                let _ = write!(s, "{n} rows -> stdout");
            }
            (None, None) => s.push_str("-> stdout"),
        }
        let _ = write!(s, " in {:.3} s", self.wall_time_s);
        if let Some(p) = &self.provenance {
            if p.reconstructed {
                let _ = write!(s, "\nnote: preset {} is reconstructed: {}", p.preset, p.note);
            }
        }
        for w in &self.warnings {
            let _ = write!(s, "\nwarning: {w}");
        }
        s
    }
}
