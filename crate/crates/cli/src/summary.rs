//! JSON documents written next to every run CSV, and the per-batch aggregate.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use graphbo::bo::{ExperimentConfig, RunRecord};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Optimizer,
    Random,
}

impl Method {
    pub fn file_prefix(self) -> &'static str {
        match self {
            Method::Optimizer => "run",
            Method::Random => "baseline",
        }
    }
}

/// Everything needed to replay one repeat.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub method: Method,
    pub repeat: usize,
    pub pool: PathBuf,
    pub situation: String,
    /// Effective experiment config, including the seed bundle. Absent for
    /// the random baseline.
    pub config: Option<ExperimentConfig>,
    /// Evaluation budget and seed of the random baseline.
    pub budget: Option<usize>,
    pub seed: Option<u64>,
    pub csv: String,
    pub optimum_id: u64,
    pub optimum_y: f64,
    pub evaluations: usize,
    pub best_id: Option<u64>,
    pub best_y: Option<f64>,
    pub evaluations_to_optimum: Option<usize>,
}

impl RunSummary {
    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

/// Mean and population standard deviation.
pub fn stat(values: &[f64]) -> Stat {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Stat { mean, std: var.sqrt() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: usize,
    pub mean: f64,
    pub std: f64,
}

/// Incumbent after `t` evaluations, averaged over runs. Runs that stopped
/// early keep their final incumbent.
pub fn trajectory(records: &[RunRecord]) -> Vec<TrajectoryPoint> {
    let longest = records.iter().map(RunRecord::len).max().unwrap_or(0);
    (1..=longest)
        .filter_map(|t| {
            let values: Vec<f64> = records.iter().filter_map(|r| r.best_at(t)).collect();
            (values.len() == records.len()).then(|| {
                let s = stat(&values);
                TrajectoryPoint { t, mean: s.mean, std: s.std }
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: Method,
    pub pool: PathBuf,
    pub situation: String,
    pub optimum_y: f64,
    pub runs: Vec<RunSummary>,
    /// Evaluations to the optimum per run, `null` where it was not reached.
    pub evaluations_to_optimum: Vec<Option<usize>>,
    /// Statistics over the runs that reached the optimum.
    pub evaluations_to_optimum_stat: Option<Stat>,
    pub trajectory: Vec<TrajectoryPoint>,
}

impl Aggregate {
    pub fn new(runs: Vec<RunSummary>, records: &[RunRecord]) -> Self {
        let first = &runs[0];
        let reached: Vec<f64> = runs.iter().filter_map(|r| r.evaluations_to_optimum).map(|k| k as f64).collect();
        Self {
            method: first.method,
            pool: first.pool.clone(),
            situation: first.situation.clone(),
            optimum_y: first.optimum_y,
            evaluations_to_optimum: runs.iter().map(|r| r.evaluations_to_optimum).collect(),
            evaluations_to_optimum_stat: (!reached.is_empty()).then(|| stat(&reached)),
            trajectory: trajectory(records),
            runs,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
