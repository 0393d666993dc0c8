//! Graph-level attributes and pool-wide min-max scaling.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{mean_betweenness_centrality, mean_clustering_coefficient, mean_degree_centrality};
use super::AttributedGraph;
use crate::error::{Error, Result};
use crate::numerics::Mat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GlobalAttribute {
    NumNodes,
    NumEdges,
    MeanDegreeCentrality,
    MeanBetweenness,
    MeanClustering,
    /// Uniform noise on `[0, 1)`, unrelated to structure.
    Noise,
}

impl GlobalAttribute {
    pub const ALL: [GlobalAttribute; 6] = [
        GlobalAttribute::NumNodes,
        GlobalAttribute::NumEdges,
        GlobalAttribute::MeanDegreeCentrality,
        GlobalAttribute::MeanBetweenness,
        GlobalAttribute::MeanClustering,
        GlobalAttribute::Noise,
    ];

    /// Short column name, `x1` through `x6`.
    pub fn short_name(self) -> &'static str {
        match self {
            GlobalAttribute::NumNodes => "x1",
            GlobalAttribute::NumEdges => "x2",
            GlobalAttribute::MeanDegreeCentrality => "x3",
            GlobalAttribute::MeanBetweenness => "x4",
            GlobalAttribute::MeanClustering => "x5",
            GlobalAttribute::Noise => "x6",
        }
    }

    pub fn long_name(self) -> &'static str {
        match self {
            GlobalAttribute::NumNodes => "num_nodes",
            GlobalAttribute::NumEdges => "num_edges",
            GlobalAttribute::MeanDegreeCentrality => "mean_degree_centrality",
            GlobalAttribute::MeanBetweenness => "mean_betweenness",
            GlobalAttribute::MeanClustering => "mean_clustering",
            GlobalAttribute::Noise => "noise",
        }
    }
}

impl fmt::Display for GlobalAttribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for GlobalAttribute {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        GlobalAttribute::ALL
            .into_iter()
            .find(|a| a.short_name() == s || a.long_name() == s)
            .ok_or_else(|| Error::UnknownAttribute(s.to_string()))
    }
}

/// Reproducible per-graph noise: one ChaCha stream per graph id.
#[derive(Clone, Copy, Debug)]
pub struct NoiseSource {
    pub pool_seed: u64,
}

impl NoiseSource {
    const SALT: u64 = 0x6e6f_6973_655f_7836;

    pub fn new(pool_seed: u64) -> Self {
        Self { pool_seed }
    }

    pub fn draw(&self, graph_id: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.pool_seed ^ Self::SALT);
        rng.set_stream(graph_id);
        rng.gen::<f64>()
    }
}

pub fn extract_global_attributes(
    graph: &AttributedGraph,
    spec: &[GlobalAttribute],
    noise: &NoiseSource,
) -> Result<Vec<f64>> {
    if spec.is_empty() {
        return Err(Error::Config("empty attribute list".into()));
    }
    spec.iter()
        .map(|attr| match attr {
            GlobalAttribute::NumNodes => Ok(graph.num_nodes as f64),
            GlobalAttribute::NumEdges => Ok(graph.num_edges() as f64),
            GlobalAttribute::MeanDegreeCentrality => mean_degree_centrality(graph),
            GlobalAttribute::MeanBetweenness => mean_betweenness_centrality(graph),
            GlobalAttribute::MeanClustering => Ok(mean_clustering_coefficient(graph)),
            GlobalAttribute::Noise => Ok(noise.draw(graph.id)),
        })
        .collect()
}

/// Per-column `(min, max)` pairs, kept so unseen values can be mapped too.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub ranges: Vec<(f64, f64)>,
}

impl MinMax {
    pub fn normalize(&self, column: usize, x: f64) -> f64 {
        let (lo, hi) = self.ranges[column];
        (x - lo) / (hi - lo)
    }
}

/// Scales every column of `data` onto `[0, 1]`.
pub fn minmax_normalize(data: &Mat<f64>) -> Result<(Mat<f64>, MinMax)> {
    let mut ranges = Vec::with_capacity(data.cols());
    for j in 0..data.cols() {
        let col = data.column(j);
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(hi > lo) {
            return Err(Error::ConstantColumn { column: j });
        }
        ranges.push((lo, hi));
    }
    let scaler = MinMax { ranges };
    let normalized = Mat::from_fn(data.rows(), data.cols(), |i, j| scaler.normalize(j, data[(i, j)]));
    Ok((normalized, scaler))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> AttributedGraph {
        AttributedGraph::from_edge_list(4, 3, &[(0, 1), (1, 2)])
    }

    #[test]
    fn counts_for_triangle() {
        let g = AttributedGraph::from_edge_list(0, 3, &[(0, 1), (0, 2), (1, 2)]);
        let spec = [GlobalAttribute::NumNodes, GlobalAttribute::NumEdges];
        assert_eq!(extract_global_attributes(&g, &spec, &NoiseSource::new(1)).unwrap(), vec![3.0, 3.0]);
    }

    #[test]
    fn full_spec_on_path() {
        let noise = NoiseSource::new(7);
        let x = extract_global_attributes(&path3(), &GlobalAttribute::ALL, &noise).unwrap();
        assert_eq!(x[0], 3.0);
        assert_eq!(x[1], 2.0);
        assert!((x[2] - 2.0 / 3.0).abs() < 1e-15);
        assert!((x[3] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(x[4], 0.0);
        assert_eq!(x[5], noise.draw(4));
        assert!((0.0..1.0).contains(&x[5]));
    }

    #[test]
    fn noise_is_keyed_by_seed_and_id() {
        let a = NoiseSource::new(3);
        assert_eq!(a.draw(10), NoiseSource::new(3).draw(10));
        assert_ne!(a.draw(10), a.draw(11));
        assert_ne!(a.draw(10), NoiseSource::new(4).draw(10));
    }

    #[test]
    fn unknown_attribute_name() {
        assert!(matches!("bogus".parse::<GlobalAttribute>(), Err(Error::UnknownAttribute(_))));
        assert_eq!("x4".parse::<GlobalAttribute>().unwrap(), GlobalAttribute::MeanBetweenness);
        assert_eq!("num_edges".parse::<GlobalAttribute>().unwrap(), GlobalAttribute::NumEdges);
    }

    #[test]
    fn minmax_examples() {
        let data = Mat::from_rows(&[[2.0, -1.0], [4.0, 0.0], [6.0, 3.0]]);
        let (norm, scaler) = minmax_normalize(&data).unwrap();
        assert_eq!(norm.column(0), vec![0.0, 0.5, 1.0]);
        assert_eq!(norm.column(1), vec![0.0, 0.25, 1.0]);
        assert_eq!(scaler.ranges, vec![(2.0, 6.0), (-1.0, 3.0)]);
        assert_eq!(scaler.normalize(0, 5.0), 0.75);

        let constant = Mat::from_rows(&[[5.0], [5.0], [5.0]]);
        assert!(matches!(minmax_normalize(&constant), Err(Error::ConstantColumn { column: 0 })));
    }

    #[test]
    fn minmax_is_idempotent() {
        let data = Mat::from_rows(&[[0.3, 10.0], [0.9, -4.0], [0.1, 2.5], [0.4, 7.0]]);
        let (once, _) = minmax_normalize(&data).unwrap();
        let (twice, _) = minmax_normalize(&once).unwrap();
        assert_eq!(once, twice);
    }
}
