//! Configuration schema: strict TOML-backed experiment definitions.

use super::{Result, RunError};
use serde::Deserialize;

/// Known experiment pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    StrategySweep,
    WalkVerify,
    CrossoverMap,
    SkillGraph,
    Allocate,
    Tradeoff,
    PasskFit,
    MvFit,
    Directionality,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::StrategySweep => "strategy-sweep",
            ExperimentKind::WalkVerify => "walk-verify",
            ExperimentKind::CrossoverMap => "crossover-map",
            ExperimentKind::SkillGraph => "skill-graph",
            ExperimentKind::Allocate => "allocate",
            ExperimentKind::Tradeoff => "tradeoff",
            ExperimentKind::PasskFit => "passk-fit",
            ExperimentKind::MvFit => "mv-fit",
            ExperimentKind::Directionality => "directionality",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "strategy-sweep" => Ok(ExperimentKind::StrategySweep),
            "walk-verify" => Ok(ExperimentKind::WalkVerify),
            "crossover-map" => Ok(ExperimentKind::CrossoverMap),
            "skill-graph" => Ok(ExperimentKind::SkillGraph),
            "allocate" => Ok(ExperimentKind::Allocate),
            "tradeoff" => Ok(ExperimentKind::Tradeoff),
            "passk-fit" => Ok(ExperimentKind::PasskFit),
            "mv-fit" => Ok(ExperimentKind::MvFit),
            "directionality" => Ok(ExperimentKind::Directionality),
            other => Err(RunError::Schema(format!("unknown experiment `{other}`"))),
        }
    }

    /// Whether the experiment consumes random draws (seed mandatory).
    pub fn stochastic(&self) -> bool {
        matches!(
            self,
            ExperimentKind::WalkVerify
                | ExperimentKind::MvFit
                | ExperimentKind::PasskFit
                | ExperimentKind::Directionality
        )
    }
}

/// Top-level config envelope: experiment name, seed, output dir, and the
/// experiment-specific parameter tree.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    pub experiment: String,
    pub seed: Option<u64>,
    pub output_dir: Option<String>,
    pub params: toml::Value,
}

impl Envelope {
    pub fn from_tree(tree: &toml::Value) -> Result<Self> {
        let env: Envelope = tree
            .clone()
            .try_into()
            .map_err(|e| RunError::Schema(e.to_string()))?;
        Ok(env)
    }
}

/// Parse a `--set key.path=value` override and apply it to the tree.
/// The value text is parsed as TOML (so arrays and strings work); bare
/// words fall back to strings.
pub fn apply_override(tree: &mut toml::Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| RunError::Schema(format!("override `{assignment}` is not key=value")))?;
    let value: toml::Value = match format!("x = {raw}").parse::<toml::Table>() {
        Ok(t) => t.get("x").cloned().unwrap(),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut node = tree;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = node
            .as_table_mut()
            .ok_or_else(|| RunError::Schema(format!("`{path}`: `{part}` is not a table")))?;
        if i + 1 == parts.len() {
            table.insert(part.to_string(), value);
            return Ok(());
        }
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    unreachable!()
}

/// Deserialize a params tree into a concrete experiment schema with strict
/// unknown-key rejection.
pub fn params<T: serde::de::DeserializeOwned>(tree: &toml::Value) -> Result<T> {
    tree.clone()
        .try_into()
        .map_err(|e| RunError::Schema(format!("params: {e}")))
}

// --- shared sub-schemas -----------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchParams {
    pub n_params: f64,
    pub n_layers: u32,
    pub d_attn: u32,
    #[serde(default)]
    pub prompt_tokens: u64,
}

impl ArchParams {
    pub fn to_arch(&self) -> Result<crate::strategies::ArchSpec> {
        crate::strategies::ArchSpec::new(
            self.n_params,
            self.n_layers,
            self.d_attn,
            self.prompt_tokens,
        )
        .map_err(|e| RunError::Schema(format!("arch: {e}")))
    }
}

/// Log-spaced sweep specification.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogSweep {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl LogSweep {
    pub fn values(&self) -> Result<Vec<f64>> {
        if !(self.lo > 0.0) || !(self.hi >= self.lo) || self.count == 0 {
            return Err(RunError::Schema(format!(
                "invalid log sweep [{}, {}] x{}",
                self.lo, self.hi, self.count
            )));
        }
        if self.count == 1 {
            return Ok(vec![self.lo]);
        }
        let (a, b) = (self.lo.ln(), self.hi.ln());
        Ok((0..self.count)
            .map(|i| (a + (b - a) * i as f64 / (self.count - 1) as f64).exp())
            .collect())
    }
}

/// Strategy selector strings: `cot`, `tot1:B`, `bon:K`, `bon-tot1:K:B`,
/// `mv:K`.
pub fn parse_strategy(
    s: &str,
    mv_spectrum: Option<&crate::population::ErrorSpectrum>,
) -> Result<crate::walk::StrategyPlan> {
    use crate::walk::{BasePolicy, StrategyPlan};
    let bad = |m: String| RunError::Schema(m);
    let parts: Vec<&str> = s.split(':').collect();
    let parse_u32 = |t: &str| -> Result<u32> {
        t.parse()
            .map_err(|_| bad(format!("strategy `{s}`: `{t}` is not a positive integer")))
    };
    match parts.as_slice() {
        ["cot"] => Ok(StrategyPlan::Cot),
        ["tot1", b] => Ok(StrategyPlan::Tot1 { b: parse_u32(b)? }),
        ["bon", k] => Ok(StrategyPlan::Bon {
            k: parse_u32(k)?,
            base: BasePolicy::Cot,
        }),
        ["bon-tot1", k, b] => Ok(StrategyPlan::Bon {
            k: parse_u32(k)?,
            base: BasePolicy::Tot1 { b: parse_u32(b)? },
        }),
        ["mv", k] => {
            let spectrum = mv_spectrum
                .ok_or_else(|| bad(format!("strategy `{s}` needs an error_spectrum")))?
                .clone();
            Ok(StrategyPlan::Mv {
                k: parse_u32(k)?,
                spectrum,
            })
        }
        _ => Err(bad(format!("unknown strategy `{s}`"))),
    }
}
