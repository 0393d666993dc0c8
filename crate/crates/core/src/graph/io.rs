//! JSON-lines pool files: one graph object per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AttributedGraph, Edge, GraphPool};
use crate::error::{Error, Result};
use crate::numerics::SparseRows;

/// On-disk form of one graph. Field order is the serialized key order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub id: u64,
    pub n: usize,
    pub edges: Vec<[usize; 3]>,
    pub node_features: Vec<Vec<f64>>,
    pub global: Vec<f64>,
}

impl From<&AttributedGraph> for GraphRecord {
    fn from(g: &AttributedGraph) -> Self {
        let mut edges: Vec<[usize; 3]> = g.edges.iter().map(|e| [e.u, e.v, e.relation]).collect();
        edges.sort_unstable();
        let dense = g.node_features.to_dense();
        Self {
            id: g.id,
            n: g.num_nodes,
            edges,
            node_features: (0..dense.rows()).map(|i| dense.row(i).to_vec()).collect(),
            global: g.global_attributes.clone(),
        }
    }
}

impl GraphRecord {
    pub fn into_graph(self) -> Result<AttributedGraph> {
        let width = self.node_features.first().map_or(0, Vec::len);
        if let Some(row) = self.node_features.iter().find(|r| r.len() != width) {
            return Err(Error::DimensionMismatch {
                context: format!("graph {} node-feature row width", self.id),
                expected: width,
                found: row.len(),
            });
        }
        let edges = self
            .edges
            .iter()
            .map(|&[u, v, relation]| Edge { u, v, relation })
            .collect();
        let g = AttributedGraph::new(
            self.id,
            self.n,
            edges,
            SparseRows::from_dense_rows(width, &self.node_features),
            self.global,
        );
        g.validate()?;
        Ok(g)
    }
}

pub fn write_pool_to<W: Write>(pool: &GraphPool, mut out: W) -> Result<()> {
    for g in pool.graphs() {
        serde_json::to_writer(&mut out, &GraphRecord::from(g))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_pool(pool: &GraphPool, path: impl AsRef<Path>) -> Result<()> {
    write_pool_to(pool, BufWriter::new(File::create(path)?))
}

/// Reads a pool; `num_relations` defaults to one more than the largest edge type.
pub fn read_pool_from<R: Read>(input: R, num_relations: Option<usize>) -> Result<GraphPool> {
    let mut graphs = Vec::new();
    for (k, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: GraphRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: k + 1,
            msg: e.to_string(),
        })?;
        graphs.push(record.into_graph()?);
    }
    let inferred = graphs
        .iter()
        .flat_map(|g| g.edges.iter().map(|e| e.relation + 1))
        .max()
        .unwrap_or(1);
    GraphPool::new(graphs, num_relations.unwrap_or(inferred))
}

pub fn read_pool(path: impl AsRef<Path>, num_relations: Option<usize>) -> Result<GraphPool> {
    read_pool_from(File::open(path)?, num_relations)
}
