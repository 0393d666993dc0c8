//! Structural statistics on the simple graph underlying an attributed graph
//! (relations merged, unweighted).

use std::collections::VecDeque;

use super::AttributedGraph;
use crate::error::{Error, Result};

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// `deg(i) / (|V| - 1)`
pub fn degree_centrality(graph: &AttributedGraph) -> Result<Vec<f64>> {
    let n = graph.num_nodes;
    if n < 2 {
        return Err(Error::TooFewNodes {
            metric: "degree centrality",
            min: 2,
            found: n,
        });
    }
    let denom = (n - 1) as f64;
    Ok(graph
        .neighbors()
        .iter()
        .map(|nb| nb.len() as f64 / denom)
        .collect())
}

pub fn mean_degree_centrality(graph: &AttributedGraph) -> Result<f64> {
    degree_centrality(graph).map(|c| mean(&c))
}

/// Brandes accumulation over unweighted shortest paths, normalized so that a
/// node lying on every shortest path between all other pairs scores 1.
pub fn betweenness_centrality(graph: &AttributedGraph) -> Result<Vec<f64>> {
    let n = graph.num_nodes;
    if n < 3 {
        return Err(Error::TooFewNodes {
            metric: "betweenness centrality",
            min: 3,
            found: n,
        });
    }
    let adj = graph.neighbors();
    let mut centrality = vec![0.0; n];

    let mut stack = Vec::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0_f64; n];
    let mut dist = vec![-1_i64; n];
    let mut delta = vec![0.0_f64; n];
    let mut queue = VecDeque::with_capacity(n);

    for s in 0..n {
        stack.clear();
        for p in &mut preds {
            p.clear();
        }
        sigma.iter_mut().for_each(|x| *x = 0.0);
        dist.iter_mut().for_each(|x| *x = -1);
        delta.iter_mut().for_each(|x| *x = 0.0);
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);

        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &w in &adj[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }

        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                centrality[w] += delta[w];
            }
        }
    }

    // every unordered pair was counted from both endpoints
    let scale = 1.0 / ((n - 1) as f64 * (n - 2) as f64);
    centrality.iter_mut().for_each(|c| *c *= scale);
    Ok(centrality)
}

pub fn mean_betweenness_centrality(graph: &AttributedGraph) -> Result<f64> {
    betweenness_centrality(graph).map(|c| mean(&c))
}

/// Local clustering `2·T(i) / (deg(i)·(deg(i) − 1))`, zero below degree 2.
pub fn clustering_coefficient(graph: &AttributedGraph) -> Vec<f64> {
    let adj = graph.neighbors();
    let n = graph.num_nodes;
    let mut marks = vec![false; n];
    adj.iter()
        .map(|nb| {
            let d = nb.len();
            if d < 2 {
                return 0.0;
            }
            nb.iter().for_each(|&j| marks[j] = true);
            let mut links = 0usize;
            for &j in nb {
                links += adj[j].iter().filter(|&&k| marks[k]).count();
            }
            nb.iter().for_each(|&j| marks[j] = false);
            // each triangle edge was seen from both ends
            links as f64 / (d * (d - 1)) as f64
        })
        .collect()
}

pub fn mean_clustering_coefficient(graph: &AttributedGraph) -> f64 {
    mean(&clustering_coefficient(graph))
}
