use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::task::Task;

/// Top-level pipeline description, normally loaded from JSON.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub global_seed: u64,
    /// Collection keys the event source injects into every event.
    #[serde(default)]
    pub sources: Vec<String>,
    pub tasks: Vec<TaskConfig>,
    /// Domain-specific block passed through to the task factory.
    #[serde(default)]
    pub detector: Option<serde_json::Value>,
    #[serde(default)]
    pub synthetic_source: Option<SyntheticSourceConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    pub id: String,
    pub kind: String,
    #[serde(default)]
    pub params: serde_json::Value,
    /// Port name to collection key, e.g. `"in": "tracks_smeared"`.
    #[serde(default)]
    pub inputs: BTreeMap<String, String>,
    #[serde(default)]
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSourceConfig {
    pub events: u64,
    pub particles_per_event: u32,
    #[serde(default)]
    pub pt_range: Option<(f64, f64)>,
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<PipelineConfig> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<PipelineConfig> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        PipelineConfig::from_json(&text)
    }
}

/// Maps a task `kind` string to a concrete task instance.
///
/// `build` returns `Ok(None)` for kinds it does not recognize, so factories
/// can be layered; an unrecognized kind only becomes an error once no
/// factory claims it.
pub trait TaskFactory {
    fn build(
        &self,
        task: &TaskConfig,
        pipeline: &PipelineConfig,
    ) -> Result<Option<Box<dyn Task>>>;
}

/// Instantiate every configured task, failing with the offending task's id
/// when a kind is unknown.
pub fn build_tasks(cfg: &PipelineConfig, factory: &dyn TaskFactory) -> Result<Vec<Box<dyn Task>>> {
    let mut tasks = Vec::with_capacity(cfg.tasks.len());
    for tc in &cfg.tasks {
        match factory.build(tc, cfg)? {
            Some(t) => tasks.push(t),
            None => {
                return Err(Error::Config(format!(
                    "task `{}`: unknown kind `{}`",
                    tc.id, tc.kind
                )))
            }
        }
    }
    Ok(tasks)
}
