//! Synthetic random-graph benchmark with a Hartmann-4 objective over
//! normalized structural attributes.

mod hartmann;
mod scaling;

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use hartmann::{hartmann4, Hartmann4Constants};
pub use scaling::{gp_reference_time, log_log_slope, scaling_harness, ScalingConfig, ScalingReport, ScalingRow};

use crate::bo::ObjectiveFunction;
use crate::error::{Error, Result};
use crate::graph::{
    extract_global_attributes, minmax_normalize, AttributedGraph, Edge, GlobalAttribute, GraphPool, MinMax, NoiseSource,
};
use crate::numerics::{Mat, SparseRows};

const MAX_RETRIES: u64 = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub pool_size: usize,
    /// Inclusive range of node counts.
    pub nodes: (usize, usize),
    /// Range of the edge probability.
    pub edge_probability: (f64, f64),
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            pool_size: 500,
            nodes: (20, 60),
            edge_probability: (0.10, 0.26),
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let (n0, n1) = self.nodes;
        let (p0, p1) = self.edge_probability;
        if self.pool_size < 2 || n0 < 3 || n1 < n0 || !(0.0..=1.0).contains(&p0) || !(0.0..=1.0).contains(&p1) || p1 < p0 {
            return Err(Error::Config(format!("invalid synthetic spec {self:?}")));
        }
        Ok(())
    }
}

/// A generated pool. Every graph carries all six normalized attributes as
/// its global attributes.
#[derive(Clone, Debug)]
pub struct SyntheticPool {
    pub spec: SyntheticSpec,
    pub pool: GraphPool,
    /// Raw attribute values, one row per graph.
    pub raw_attributes: Mat<f64>,
    pub scaler: MinMax,
}

fn random_graph(id: u64, index: usize, spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> AttributedGraph {
    let n = rng.gen_range(spec.nodes.0..=spec.nodes.1);
    let (p0, p1) = spec.edge_probability;
    let p = if p1 > p0 { rng.gen_range(p0..p1) } else { p0 };
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push(Edge::new(u, v, 0));
            }
        }
    }
    let features = SparseRows::repeated_row(n, spec.pool_size, &[(index, 1.0)]);
    AttributedGraph::new(id, n, edges, features, Vec::new())
}

/// Draws `pool_size` Erdős–Rényi graphs, extracts the six attributes and
/// min-max scales them across the pool.
pub fn generate_pool(spec: &SyntheticSpec) -> Result<SyntheticPool> {
    spec.validate()?;
    let noise = NoiseSource::new(spec.seed);
    let mut last_err = None;
    for attempt in 0..=MAX_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(attempt);
        let graphs: Vec<AttributedGraph> = (0..spec.pool_size)
            .map(|i| random_graph(i as u64, i, spec, &mut rng))
            .collect();
        let rows: Vec<Vec<f64>> = graphs
            .par_iter()
            .map(|g| extract_global_attributes(g, &GlobalAttribute::ALL, &noise))
            .collect::<Result<_>>()?;
        let raw = Mat::from_fn(rows.len(), GlobalAttribute::ALL.len(), |i, j| rows[i][j]);
        match minmax_normalize(&raw) {
            Ok((normalized, scaler)) => {
                let graphs = graphs
                    .into_iter()
                    .enumerate()
                    .map(|(i, mut g)| {
                        g.global_attributes = normalized.row(i).to_vec();
                        g
                    })
                    .collect();
                return Ok(SyntheticPool {
                    spec: spec.clone(),
                    pool: GraphPool::new(graphs, 1)?,
                    raw_attributes: raw,
                    scaler,
                });
            }
            Err(e @ Error::ConstantColumn { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(Error::DegeneratePool(format!(
        "{} after {MAX_RETRIES} retries",
        last_err.map_or_else(String::new, |e| e.to_string())
    )))
}

impl SyntheticPool {
    pub fn mean_nodes(&self) -> f64 {
        let g = self.pool.graphs();
        g.iter().map(|g| g.num_nodes as f64).sum::<f64>() / g.len() as f64
    }

    pub fn mean_edges(&self) -> f64 {
        let g = self.pool.graphs();
        g.iter().map(|g| g.num_edges() as f64).sum::<f64>() / g.len() as f64
    }
}

/// Which normalized attributes the surrogate sees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Situation {
    /// `x̃1..x̃4`, exactly the objective's inputs.
    A,
    /// `x̃1, x̃2`.
    B,
    /// All six.
    C,
    /// `x̃5, x̃6`, unrelated to the objective.
    D,
}

impl Situation {
    pub const ALL: [Situation; 4] = [Situation::A, Situation::B, Situation::C, Situation::D];

    pub fn columns(self) -> &'static [usize] {
        match self {
            Situation::A => &[0, 1, 2, 3],
            Situation::B => &[0, 1],
            Situation::C => &[0, 1, 2, 3, 4, 5],
            Situation::D => &[4, 5],
        }
    }
}

impl fmt::Display for Situation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Situation::A => "a",
            Situation::B => "b",
            Situation::C => "c",
            Situation::D => "d",
        })
    }
}

impl FromStr for Situation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Situation::A),
            "b" => Ok(Situation::B),
            "c" => Ok(Situation::C),
            "d" => Ok(Situation::D),
            _ => Err(Error::UnknownSituation(s.to_string())),
        }
    }
}

/// `y(G) = −Hart(x̃1..x̃4)`, looked up by graph id.
#[derive(Clone, Debug)]
pub struct SyntheticObjective {
    values: HashMap<u64, f64>,
}

impl SyntheticObjective {
    /// Builds the objective from a pool whose graphs carry all six
    /// normalized attributes.
    pub fn from_full_pool(pool: &GraphPool) -> Result<Self> {
        if pool.global_dim() < 4 {
            return Err(Error::DimensionMismatch {
                context: "attributes needed by the objective".into(),
                expected: 6,
                found: pool.global_dim(),
            });
        }
        let table = Hartmann4Constants::standard();
        let values = pool
            .graphs()
            .iter()
            .map(|g| {
                let x = [0, 1, 2, 3].map(|j| g.global_attributes[j]);
                (g.id, -table.hart(&x))
            })
            .collect();
        Ok(Self { values })
    }

    pub fn value(&self, id: u64) -> Option<f64> {
        self.values.get(&id).copied()
    }

    /// Exhaustive maximum as `(graph id, y)`, lowest id first on ties.
    pub fn optimum(&self) -> (u64, f64) {
        self.values
            .iter()
            .map(|(&id, &y)| (id, y))
            .fold((u64::MAX, f64::NEG_INFINITY), |best, (id, y)| {
                if y > best.1 || (y == best.1 && id < best.0) {
                    (id, y)
                } else {
                    best
                }
            })
    }
}

impl ObjectiveFunction for SyntheticObjective {
    fn evaluate(&self, graph: &AttributedGraph) -> Result<f64> {
        self.value(graph.id).ok_or_else(|| Error::Objective {
            graph: graph.id,
            reason: "graph is not part of the benchmark pool".into(),
        })
    }

    fn cost_tag(&self) -> &str {
        "synthetic-hartmann4"
    }
}

/// The exposed pool for `situation` and the (situation-independent) objective.
pub fn situation_objective(pool: &GraphPool, situation: Situation) -> Result<(GraphPool, SyntheticObjective)> {
    let objective = SyntheticObjective::from_full_pool(pool)?;
    Ok((pool.with_global_columns(situation.columns())?, objective))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeRange {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

/// Metadata written next to a generated pool file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub seed: u64,
    pub generator: SyntheticSpec,
    pub attributes: Vec<AttributeRange>,
    pub mean_nodes: f64,
    pub mean_edges: f64,
    pub optimum_id: u64,
    pub optimum_y: f64,
}

impl Sidecar {
    pub fn for_pool(pool: &SyntheticPool) -> Result<Self> {
        let (optimum_id, optimum_y) = SyntheticObjective::from_full_pool(&pool.pool)?.optimum();
        Ok(Self {
            seed: pool.spec.seed,
            generator: pool.spec.clone(),
            attributes: GlobalAttribute::ALL
                .iter()
                .zip(&pool.scaler.ranges)
                .map(|(a, &(min, max))| AttributeRange {
                    name: a.short_name().to_string(),
                    min,
                    max,
                })
                .collect(),
            mean_nodes: pool.mean_nodes(),
            mean_edges: pool.mean_edges(),
            optimum_id,
            optimum_y,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}
