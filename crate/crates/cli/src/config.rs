use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::{HistoryName, LlmArgs, ModeName, StrategyName, TaskName};
use crate::error::Failure;

/// Everything that determines the outcome of a `correct` or `icl` run.
/// Embedded verbatim in the run artifact under `config.run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub strategy: StrategyName,
    /// Defaults to `correction` for `correct` and `scores` for `icl`.
    pub task: Option<TaskName>,
    pub backend: String,
    pub script: Option<PathBuf>,
    pub endpoint: Option<String>,
    pub model: String,
    pub history: HistoryName,
    pub shots: usize,
    pub train: Option<PathBuf>,
    pub domain: Option<String>,
    pub reasoning: bool,
    pub seed: u64,
    pub lambda: f64,
    pub use_acoustic: bool,
    pub arpa: Option<PathBuf>,
    pub mode: ModeName,
    pub max_in_flight: usize,
    pub max_attempts: u32,
    pub timeout_secs: f64,
    pub max_fallback_rate: f64,
    pub tap_live: bool,
    pub name: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            strategy: StrategyName::Zero,
            task: None,
            backend: "http".into(),
            script: None,
            endpoint: None,
            model: "default".into(),
            history: HistoryName::OneByOne,
            shots: 2,
            train: None,
            domain: None,
            reasoning: false,
            seed: 0,
            lambda: 1.0,
            use_acoustic: true,
            arpa: None,
            mode: ModeName::Augment,
            max_in_flight: 4,
            max_attempts: 5,
            timeout_secs: 60.0,
            max_fallback_rate: 0.2,
            tap_live: false,
            name: None,
        }
    }
}

impl RunConfig {
    /// Defaults, then `LLM_ENDPOINT`, then the `--config` file, then flags.
    pub fn resolve(args: &LlmArgs) -> Result<RunConfig, Failure> {
        let mut layered = serde_json::to_value(RunConfig::default()).expect("config serializes");
        if let Ok(endpoint) = std::env::var("LLM_ENDPOINT") {
            layered["endpoint"] = Value::String(endpoint);
        }
        if let Some(path) = &args.config {
            overlay(&mut layered, load_file(path)?);
        }
        overlay(&mut layered, flags(args));
        serde_json::from_value(layered).map_err(|e| Failure::usage(format!("invalid configuration: {e}")))
    }
}

/// Accepts a bare configuration or a run artifact carrying one in `config.run`.
fn load_file(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    match value.pointer("/config/run") {
        Some(run) => Ok(run.clone()),
        None if value.is_object() => Ok(value),
        None => Err(Failure::usage(format!("{}: expected a JSON object", path.display()))),
    }
}

fn overlay(base: &mut Value, top: Value) {
    if let (Some(base), Value::Object(top)) = (base.as_object_mut(), top) {
        for (k, v) in top {
            base.insert(k, v);
        }
    }
}

fn flags(a: &LlmArgs) -> Value {
    fn j<T: Serialize>(v: &Option<T>) -> Option<Value> {
        v.as_ref().map(|v| serde_json::to_value(v).expect("flag values serialize"))
    }
    let pairs = [
        ("input", j(&a.input)),
        ("strategy", j(&a.strategy)),
        ("task", j(&a.task)),
        ("backend", j(&a.backend)),
        ("script", j(&a.script)),
        ("endpoint", j(&a.endpoint)),
        ("model", j(&a.model)),
        ("history", j(&a.history)),
        ("shots", j(&a.shots)),
        ("train", j(&a.train)),
        ("domain", j(&a.domain)),
        ("reasoning", a.reasoning.then_some(Value::Bool(true))),
        ("seed", j(&a.seed)),
        ("lambda", j(&a.lambda)),
        ("use_acoustic", a.no_acoustic.then_some(Value::Bool(false))),
        ("arpa", j(&a.arpa)),
        ("mode", j(&a.mode)),
        ("max_in_flight", j(&a.max_in_flight)),
        ("max_attempts", j(&a.max_attempts)),
        ("timeout_secs", j(&a.timeout)),
        ("max_fallback_rate", j(&a.max_fallback_rate)),
        ("tap_live", a.tap_live.then_some(Value::Bool(true))),
        ("name", j(&a.name)),
    ];
    Value::Object(pairs.into_iter().filter_map(|(k, v)| Some((k.to_string(), v?))).collect())
}
