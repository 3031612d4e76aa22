//! Deterministic file output and empirical-data ingestion.

use super::{Result, RunError};
use crate::population::EmpiricalCurve;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Format a float at 12 significant digits, locale-independent.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.11e}")
}

/// A CSV cell: either a preformatted string/integer or a float routed
/// through the fixed significant-digit formatter.
pub enum Cell {
    Str(String),
    Uint(u64),
    Float(f64),
    Bool(bool),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Str(s.to_string())
    }
}
impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Str(s)
    }
}
impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}
impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Uint(x)
    }
}
impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Uint(x as u64)
    }
}
impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::Uint(u) => u.to_string(),
            Cell::Float(x) => fmt_sig(*x),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

/// Accumulates CSV rows and writes them atomically.
pub struct CsvOut {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvOut {
    pub fn new(header: &[&str]) -> Self {
        CsvOut {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells.iter().map(Cell::render).collect());
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = self.header.join(",");
        text.push('\n');
        for row in &self.rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        atomic_write(path, text.as_bytes())
    }
}

/// Write bytes through a temp file in the same directory, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Write the run summary JSON (resolved config + per-experiment extras).
pub fn write_summary(
    path: &Path,
    experiment: &str,
    seed: Option<u64>,
    resolved: &toml::Value,
    extra: serde_json::Value,
) -> Result<()> {
    let config_json = toml_to_json(resolved);
    let doc = serde_json::json!({
        "experiment": experiment,
        "seed": seed,
        "config": config_json,
        "summary": extra,
    });
    let text = serde_json::to_string_pretty(&doc)
        .map_err(|e| RunError::Numerical(format!("summary serialization: {e}")))?;
    atomic_write(path, text.as_bytes())
}

fn toml_to_json(v: &toml::Value) -> serde_json::Value {
    match v {
        toml::Value::String(s) => serde_json::Value::String(s.clone()),
        toml::Value::Integer(i) => serde_json::Value::from(*i),
        toml::Value::Float(f) => serde_json::Value::from(*f),
        toml::Value::Boolean(b) => serde_json::Value::Bool(*b),
        toml::Value::Datetime(d) => serde_json::Value::String(d.to_string()),
        toml::Value::Array(a) => serde_json::Value::Array(a.iter().map(toml_to_json).collect()),
        toml::Value::Table(t) => serde_json::Value::Object(
            t.iter()
                .map(|(k, v)| (k.clone(), toml_to_json(v)))
                .collect(),
        ),
    }
}

/// Resolve the output directory: explicit config value, then the
/// `DS3_OUT_DIR` environment variable, then `./ds3-out`.
pub fn output_dir(config_value: Option<&str>) -> PathBuf {
    if let Some(dir) = config_value {
        return PathBuf::from(dir);
    }
    if let Ok(dir) = std::env::var("DS3_OUT_DIR") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from("ds3-out")
}

/// Ingest a `model,k,pass_rate` CSV into per-model curves.
///
/// The header row is required; k values are sorted ascending per model;
/// duplicate (model, k) pairs, out-of-range rates, and malformed rows are
/// rejected with their line number.
pub fn ingest_passk(path: &Path) -> Result<Vec<EmpiricalCurve>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::DataFile(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| RunError::DataFile(format!("{}: empty file", path.display())))?;
    let expected = "model,k,pass_rate";
    if header.1.trim() != expected {
        return Err(RunError::DataFile(format!(
            "{}: line 1: header must be `{expected}`",
            path.display()
        )));
    }
    let mut by_model: BTreeMap<String, BTreeMap<u64, f64>> = BTreeMap::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let (model, k_str, rate_str) = match (parts.next(), parts.next(), parts.next(), parts.next())
        {
            (Some(a), Some(b), Some(c), None) => (a.trim(), b.trim(), c.trim()),
            _ => {
                return Err(RunError::DataFile(format!(
                    "{}: line {line_no}: expected 3 comma-separated fields",
                    path.display()
                )))
            }
        };
        let k: u64 = k_str.parse().map_err(|_| {
            RunError::DataFile(format!(
                "{}: line {line_no}: k `{k_str}` is not a positive integer",
                path.display()
            ))
        })?;
        if k == 0 {
            return Err(RunError::DataFile(format!(
                "{}: line {line_no}: k must be >= 1",
                path.display()
            )));
        }
        let rate: f64 = rate_str.parse().map_err(|_| {
            RunError::DataFile(format!(
                "{}: line {line_no}: pass_rate `{rate_str}` is not a number",
                path.display()
            ))
        })?;
        if !(0.0..=1.0).contains(&rate) || rate.is_nan() {
            return Err(RunError::DataFile(format!(
                "{}: line {line_no}: pass_rate {rate} outside [0, 1]",
                path.display()
            )));
        }
        let entry = by_model.entry(model.to_string()).or_default();
        if entry.insert(k, rate).is_some() {
            return Err(RunError::DataFile(format!(
                "{}: line {line_no}: duplicate (model `{model}`, k={k})",
                path.display()
            )));
        }
    }
    let mut curves = Vec::new();
    for (model, samples) in by_model {
        let curve = EmpiricalCurve::new(model, samples.into_iter().collect())
            .map_err(|e| RunError::DataFile(format!("{}: {e}", path.display())))?;
        curves.push(curve);
    }
    if curves.is_empty() {
        return Err(RunError::DataFile(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok(curves)
}
