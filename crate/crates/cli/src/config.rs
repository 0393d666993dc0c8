//! Flat `key=value` configuration merged onto [`ExperimentConfig`].
//!
//! Keys name fields of the serialized experiment config; nested fields use
//! dots (`surrogate.gc_width=32`, `seeds.mcmc=7`). Values are read as JSON
//! when they parse as JSON and as plain strings otherwise, so `0.001`,
//! `true`, `null` and `tanh` all work. Lines starting with `#` are comments.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use graphbo::bo::ExperimentConfig;
use serde_json::Value;

/// Ordered list of assignments, later entries winning.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub entries: Vec<(String, String)>,
}

impl Overrides {
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key=value, found `{line}`", i + 1))?;
            entries.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse_text(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn push_assignment(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| anyhow!("expected key=value, found `{assignment}`"))?;
        self.entries.push((k.trim().to_string(), v.trim().to_string()));
        Ok(())
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn apply(&self, base: &ExperimentConfig) -> Result<ExperimentConfig> {
        let mut tree = serde_json::to_value(base)?;
        for (key, raw) in &self.entries {
            let slot = key
                .split('.')
                .try_fold(&mut tree, |node, part| node.get_mut(part))
                .ok_or_else(|| anyhow!("unknown config key `{key}`"))?;
            *slot = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.clone()));
        }
        let config: ExperimentConfig =
            serde_json::from_value(tree).map_err(|e| anyhow!("invalid config value: {e}"))?;
        if let Err(e) = config.validate() {
            bail!("{e}");
        }
        Ok(config)
    }
}
