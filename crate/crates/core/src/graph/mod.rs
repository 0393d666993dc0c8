//! Attributed graphs, per-relation adjacency normalization and structural
//! statistics.

mod attributes;
mod io;
mod metrics;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use attributes::{
    extract_global_attributes, minmax_normalize, GlobalAttribute, MinMax, NoiseSource,
};
pub use io::{read_pool, read_pool_from, write_pool, write_pool_to, GraphRecord};
pub use metrics::{
    betweenness_centrality, clustering_coefficient, degree_centrality, mean,
    mean_betweenness_centrality, mean_clustering_coefficient, mean_degree_centrality,
};

use crate::error::{Error, Result};
use crate::numerics::{Mat, SparseRows};
use crate::scalar::Real;

/// Undirected typed edge, stored with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub relation: usize,
}

impl Edge {
    /// Orders the endpoints so that `u <= v`.
    pub fn new(a: usize, b: usize, relation: usize) -> Self {
        Self {
            u: a.min(b),
            v: a.max(b),
            relation,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttributedGraph {
    pub id: u64,
    pub num_nodes: usize,
    pub edges: Vec<Edge>,
    /// `|V| × D_V` node-feature matrix, stored sparsely.
    pub node_features: SparseRows<f64>,
    pub global_attributes: Vec<f64>,
}

impl AttributedGraph {
    pub fn new(
        id: u64,
        num_nodes: usize,
        edges: Vec<Edge>,
        node_features: SparseRows<f64>,
        global_attributes: Vec<f64>,
    ) -> Self {
        Self {
            id,
            num_nodes,
            edges,
            node_features,
            global_attributes,
        }
    }

    /// Graph with single-relation edges, the constant feature `1` on every
    /// node and no global attributes.
    pub fn from_edge_list(id: u64, num_nodes: usize, pairs: &[(usize, usize)]) -> Self {
        let edges = pairs.iter().map(|&(a, b)| Edge::new(a, b, 0)).collect();
        Self::new(
            id,
            num_nodes,
            edges,
            SparseRows::repeated_row(num_nodes, 1, &[(0, 1.0)]),
            Vec::new(),
        )
    }

    pub fn node_dim(&self) -> usize {
        self.node_features.cols()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Checks every structural invariant, reporting the first violation.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.edges.len());
        for e in &self.edges {
            for index in [e.u, e.v] {
                if index >= self.num_nodes {
                    return Err(Error::IndexOutOfRange {
                        graph: self.id,
                        index,
                        num_nodes: self.num_nodes,
                    });
                }
            }
            if e.u == e.v {
                return Err(Error::SelfLoop {
                    graph: self.id,
                    node: e.u,
                });
            }
            if e.u > e.v {
                return Err(Error::UnorderedEdge {
                    graph: self.id,
                    u: e.u,
                    v: e.v,
                });
            }
            if !seen.insert(*e) {
                return Err(Error::DuplicateEdge {
                    graph: self.id,
                    u: e.u,
                    v: e.v,
                    relation: e.relation,
                });
            }
        }
        if self.node_features.rows() != self.num_nodes {
            return Err(Error::DimensionMismatch {
                context: format!("graph {} node-feature rows", self.id),
                expected: self.num_nodes,
                found: self.node_features.rows(),
            });
        }
        if self.node_features.values().iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("graph {} node features", self.id)));
        }
        if self.global_attributes.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("graph {} global attributes", self.id)));
        }
        Ok(())
    }

    /// Also checks relation indices and the shared dimensions.
    pub fn validate_dims(&self, node_dim: usize, num_relations: usize, global_dim: usize) -> Result<()> {
        self.validate()?;
        if let Some(e) = self.edges.iter().find(|e| e.relation >= num_relations) {
            return Err(Error::RelationOutOfRange {
                graph: self.id,
                relation: e.relation,
                num_relations,
            });
        }
        if self.node_dim() != node_dim {
            return Err(Error::DimensionMismatch {
                context: format!("graph {} node-feature width", self.id),
                expected: node_dim,
                found: self.node_dim(),
            });
        }
        if self.global_attributes.len() != global_dim {
            return Err(Error::DimensionMismatch {
                context: format!("graph {} global attributes", self.id),
                expected: global_dim,
                found: self.global_attributes.len(),
            });
        }
        Ok(())
    }

    /// Neighbor lists of the simple graph obtained by merging all relations.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Relabels nodes so that old node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.num_nodes);
        let edges = self
            .edges
            .iter()
            .map(|e| Edge::new(perm[e.u], perm[e.v], e.relation))
            .collect();
        let dense = self.node_features.to_dense();
        let mut moved = Mat::zeros(dense.rows(), dense.cols());
        for (i, &target) in perm.iter().enumerate() {
            moved.row_mut(target).copy_from_slice(dense.row(i));
        }
        Self::new(
            self.id,
            self.num_nodes,
            edges,
            SparseRows::from_dense(&moved),
            self.global_attributes.clone(),
        )
    }
}

/// `Â_r = D̃_r^{-1/2} (A_r + I) D̃_r^{-1/2}` for every relation `r`.
#[derive(Clone, Debug)]
pub struct NormalizedAdjacency<T> {
    pub per_relation: Vec<Mat<T>>,
}

impl<T: Real> NormalizedAdjacency<T> {
    pub fn num_relations(&self) -> usize {
        self.per_relation.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.per_relation.first().map_or(0, Mat::rows)
    }

    pub fn cast<U: Real>(&self) -> NormalizedAdjacency<U> {
        NormalizedAdjacency {
            per_relation: self.per_relation.iter().map(Mat::cast).collect(),
        }
    }
}

pub fn normalized_adjacency<T: Real>(
    graph: &AttributedGraph,
    num_relations: usize,
) -> Result<NormalizedAdjacency<T>> {
    graph.validate()?;
    let n = graph.num_nodes;
    let mut per_relation = Vec::with_capacity(num_relations);
    for r in 0..num_relations {
        let mut degree = vec![1.0_f64; n];
        let edges: Vec<&Edge> = graph.edges.iter().filter(|e| e.relation == r).collect();
        for e in &edges {
            degree[e.u] += 1.0;
            degree[e.v] += 1.0;
        }
        let mut a = Mat::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = T::of(1.0 / degree[i]);
        }
        for e in edges {
            let w = T::of(1.0 / (degree[e.u] * degree[e.v]).sqrt());
            a[(e.u, e.v)] = w;
            a[(e.v, e.u)] = w;
        }
        per_relation.push(a);
    }
    if let Some(e) = graph.edges.iter().find(|e| e.relation >= num_relations) {
        return Err(Error::RelationOutOfRange {
            graph: graph.id,
            relation: e.relation,
            num_relations,
        });
    }
    Ok(NormalizedAdjacency { per_relation })
}

/// The finite search space: graphs sharing `D_V`, `D_E` and `D_G`.
#[derive(Clone, Debug)]
pub struct GraphPool {
    graphs: Vec<AttributedGraph>,
    node_dim: usize,
    num_relations: usize,
    global_dim: usize,
}

impl GraphPool {
    pub fn new(graphs: Vec<AttributedGraph>, num_relations: usize) -> Result<Self> {
        let first = graphs
            .first()
            .ok_or_else(|| Error::DegeneratePool("empty pool".into()))?;
        let node_dim = first.node_dim();
        let global_dim = first.global_attributes.len();
        let mut ids = HashSet::with_capacity(graphs.len());
        for g in &graphs {
            g.validate_dims(node_dim, num_relations, global_dim)?;
            if !ids.insert(g.id) {
                return Err(Error::DegeneratePool(format!("duplicate graph id {}", g.id)));
            }
        }
        Ok(Self {
            graphs,
            node_dim,
            num_relations,
            global_dim,
        })
    }

    pub fn graphs(&self) -> &[AttributedGraph] {
        &self.graphs
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn get(&self, index: usize) -> &AttributedGraph {
        &self.graphs[index]
    }

    pub fn node_dim(&self) -> usize {
        self.node_dim
    }

    pub fn num_relations(&self) -> usize {
        self.num_relations
    }

    pub fn global_dim(&self) -> usize {
        self.global_dim
    }

    /// Replaces every graph's global attributes with the selected columns.
    pub fn with_global_columns(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&c) = columns.iter().find(|&&c| c >= self.global_dim) {
            return Err(Error::DimensionMismatch {
                context: "global attribute column".into(),
                expected: self.global_dim,
                found: c,
            });
        }
        let graphs = self
            .graphs
            .iter()
            .map(|g| {
                let mut g = g.clone();
                g.global_attributes = columns.iter().map(|&c| g.global_attributes[c]).collect();
                g
            })
            .collect();
        Ok(Self {
            graphs,
            node_dim: self.node_dim,
            num_relations: self.num_relations,
            global_dim: columns.len(),
        })
    }
}
