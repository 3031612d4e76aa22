//! Experiment runner and I/O layer behind the `ds3` binary.
//!
//! A run takes a TOML configuration (strict schema: unknown keys are
//! rejected), optional `--set key=value` overrides, and writes `result.csv`
//! plus `summary.json` into the output directory. The summary embeds the
//! fully resolved configuration and seed, so a run can be reproduced from
//! its summary alone. Numeric CSV output is formatted at 12 significant
//! digits, locale-independent, and files are written atomically via a
//! temp-file rename.

mod config;
mod experiments;
mod io;

pub use config::{apply_override, ExperimentKind};
pub use io::ingest_passk;

use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    /// Malformed or inconsistent configuration (exit 2).
    #[error("configuration error: {0}")]
    Schema(String),
    /// Referenced data file missing or unreadable (exit 3).
    #[error("data file error: {0}")]
    DataFile(String),
    /// Numerical failure inside an experiment (exit 4).
    #[error("numerical error: {0}")]
    Numerical(String),
    /// Output I/O failure (exit 1).
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Schema(_) => 2,
            RunError::DataFile(_) => 3,
            RunError::Numerical(_) => 4,
            RunError::Io(_) => 1,
        }
    }

    /// Machine-readable error payload for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": self.to_string(),
            "exit_code": self.exit_code(),
        })
        .to_string()
    }
}

pub type Result<T> = std::result::Result<T, RunError>;

/// Outcome of a successful run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub experiment: ExperimentKind,
    pub result_csv: PathBuf,
    pub summary_json: PathBuf,
    pub rows: usize,
}

/// Load a configuration: a TOML file, or a `summary.json` from an earlier
/// run (its embedded resolved config is extracted, so outputs can be
/// reproduced directly from a run's summary).
pub fn load_config(path: &Path) -> Result<toml::Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::DataFile(format!("{}: {e}", path.display())))?;
    if let Ok(json) = serde_json::from_str::<serde_json::Value>(&text) {
        let embedded = json.get("config").cloned().unwrap_or(json);
        return json_to_toml(&embedded)
            .ok_or_else(|| RunError::Schema(format!("{}: not a config object", path.display())));
    }
    text.parse::<toml::Table>()
        .map(toml::Value::Table)
        .map_err(|e| RunError::Schema(format!("{}: {e}", path.display())))
}

fn json_to_toml(v: &serde_json::Value) -> Option<toml::Value> {
    Some(match v {
        serde_json::Value::Null => return None,
        serde_json::Value::Bool(b) => toml::Value::Boolean(*b),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                toml::Value::Integer(i)
            } else {
                toml::Value::Float(n.as_f64()?)
            }
        }
        serde_json::Value::String(s) => toml::Value::String(s.clone()),
        serde_json::Value::Array(a) => {
            toml::Value::Array(a.iter().map(json_to_toml).collect::<Option<_>>()?)
        }
        serde_json::Value::Object(o) => toml::Value::Table(
            o.iter()
                .filter(|(_, v)| !v.is_null())
                .map(|(k, v)| Some((k.clone(), json_to_toml(v)?)))
                .collect::<Option<_>>()?,
        ),
    })
}

/// Execute one experiment from a resolved configuration tree.
///
/// `expected` (from the CLI subcommand) must agree with the config's
/// `experiment` key when both are present; `seed_override` and
/// `out_override` take precedence over the config values.
pub fn run(
    mut tree: toml::Value,
    expected: Option<ExperimentKind>,
    seed_override: Option<u64>,
    out_override: Option<PathBuf>,
) -> Result<RunSummary> {
    let table = tree
        .as_table_mut()
        .ok_or_else(|| RunError::Schema("top-level config must be a table".into()))?;

    if let Some(seed) = seed_override {
        table.insert("seed".into(), toml::Value::Integer(seed as i64));
    }
    if let Some(dir) = &out_override {
        table.insert(
            "output_dir".into(),
            toml::Value::String(dir.display().to_string()),
        );
    }
    if let Some(kind) = expected {
        match table.get("experiment").and_then(|v| v.as_str()) {
            None => {
                table.insert(
                    "experiment".into(),
                    toml::Value::String(kind.name().to_string()),
                );
            }
            Some(s) if s == kind.name() => {}
            Some(s) => {
                return Err(RunError::Schema(format!(
                    "config experiment `{s}` does not match requested `{}`",
                    kind.name()
                )));
            }
        }
    }

    experiments::dispatch(tree)
}
