#![allow(dead_code)]

use graphbo::graph::{AttributedGraph, Edge};
use graphbo::numerics::SparseRows;
use graphbo::surrogate::{batch_gradient, loss, GraphInput, SurrogateConfig, SurrogateParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every labelled simple graph on `n` nodes, as edge lists.
pub fn all_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    (0u32..1 << pairs.len())
        .map(|mask| {
            pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &p)| p)
                .collect()
        })
        .collect()
}

pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; n]; n];
    for &(u, v) in edges {
        a[u][v] = true;
        a[v][u] = true;
    }
    a
}

pub fn is_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let a = adjacency(n, edges);
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            if a[u][v] && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// All simple paths from `s` to `t`, by depth-first enumeration.
fn simple_paths(a: &[Vec<bool>], s: usize, t: usize) -> Vec<Vec<usize>> {
    fn walk(a: &[Vec<bool>], path: &mut Vec<usize>, t: usize, out: &mut Vec<Vec<usize>>) {
        let u = *path.last().unwrap();
        if u == t {
            out.push(path.clone());
            return;
        }
        for v in 0..a.len() {
            if a[u][v] && !path.contains(&v) {
                path.push(v);
                walk(a, path, t, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(a, &mut vec![s], t, &mut out);
    out
}

/// Betweenness by enumerating every simple path between every pair and
/// keeping the shortest ones.
pub fn brute_force_betweenness(n: usize, edges: &[(usize, usize)]) -> Vec<f64> {
    let a = adjacency(n, edges);
    let mut c = vec![0.0; n];
    for s in 0..n {
        for t in s + 1..n {
            let paths = simple_paths(&a, s, t);
            let Some(shortest) = paths.iter().map(Vec::len).min() else {
                continue;
            };
            let best: Vec<&Vec<usize>> = paths.iter().filter(|p| p.len() == shortest).collect();
            for (v, cv) in c.iter_mut().enumerate() {
                if v == s || v == t {
                    continue;
                }
                let through = best.iter().filter(|p| p.contains(&v)).count();
                *cv += through as f64 / best.len() as f64;
            }
        }
    }
    let scale = 2.0 / ((n - 1) as f64 * (n - 2) as f64);
    c.into_iter().map(|x| x * scale).collect()
}

/// Clustering by checking every pair of neighbours.
pub fn brute_force_clustering(n: usize, edges: &[(usize, usize)]) -> Vec<f64> {
    let a = adjacency(n, edges);
    (0..n)
        .map(|i| {
            let nb: Vec<usize> = (0..n).filter(|&j| a[i][j]).collect();
            let d = nb.len();
            if d < 2 {
                return 0.0;
            }
            let mut closed = 0;
            for x in 0..d {
                for y in x + 1..d {
                    if a[nb[x]][nb[y]] {
                        closed += 1;
                    }
                }
            }
            2.0 * closed as f64 / (d * (d - 1)) as f64
        })
        .collect()
}

/// The small network used for gradient checks.
pub fn downsized_config() -> SurrogateConfig {
    SurrogateConfig {
        num_gc_layers: 2,
        gc_width: 8,
        pool_width: 5,
        num_fc_layers: 1,
        fc_width: 6,
        num_bases: 2,
        num_relations: 2,
        input_dim: 3,
        global_dim: 2,
        ..SurrogateConfig::default()
    }
}

/// Random multi-relational graph with dense random node features.
pub fn random_graph(rng: &mut ChaCha8Rng, id: u64, max_nodes: usize, config: &SurrogateConfig) -> AttributedGraph {
    let n = rng.gen_range(1..=max_nodes);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < 0.5 {
                edges.push(Edge::new(u, v, rng.gen_range(0..config.num_relations)));
            }
        }
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..config.input_dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let features = SparseRows::from_dense_rows(config.input_dim, &rows);
    let global = (0..config.global_dim).map(|_| rng.gen_range(0.0..1.0)).collect();
    AttributedGraph::new(id, n, edges, features, global)
}

/// Largest relative error between the analytic gradient and central
/// differences with step `h`, over every parameter.
pub fn max_gradient_error(seed: u64, h: f64) -> f64 {
    let config = downsized_config();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graphs: Vec<GraphInput<f64>> = (0..4)
        .map(|i| GraphInput::new(&random_graph(&mut rng, i, 6, &config), config.num_relations).unwrap())
        .collect();
    let batch: Vec<(&GraphInput<f64>, f64)> = graphs.iter().map(|g| (g, rng.gen_range(-1.0..1.0))).collect();
    let params = SurrogateParams::<f64>::init(&config, seed).unwrap();
    let (_, grads) = batch_gradient(&batch, &params, &config, 0).unwrap();
    let analytic: Vec<f64> = grads
        .tensors()
        .iter()
        .flat_map(|(_, m)| m.as_slice().to_vec())
        .collect();

    let mut worst = 0.0f64;
    let mut k = 0;
    let count = params.tensors().len();
    for t in 0..count {
        let len = params.tensors()[t].1.as_slice().len();
        for e in 0..len {
            let mut plus = params.clone();
            plus.tensors_mut()[t].as_mut_slice()[e] += h;
            let mut minus = params.clone();
            minus.tensors_mut()[t].as_mut_slice()[e] -= h;
            let numeric = (loss(&batch, &plus, &config).unwrap() - loss(&batch, &minus, &config).unwrap()) / (2.0 * h);
            let a = analytic[k];
            let denom = a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max((a - numeric).abs() / denom);
            k += 1;
        }
    }
    worst
}

/// Monte-Carlo `E[max(0, Y − y_max)]` for `Y ~ N(μ, σ²)` and its standard error.
pub fn monte_carlo_ei(mu: f64, sigma: f64, y_max: f64, draws: usize, seed: u64) -> (f64, f64) {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..draws {
        let z: f64 = StandardNormal.sample(&mut rng);
        let gain = (mu + sigma * z - y_max).max(0.0);
        sum += gain;
        sum_sq += gain * gain;
    }
    let n = draws as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

/// Exact standard error of the `draws`-sample Monte-Carlo EI estimate,
/// from the closed-form second moment `E[max(0, Y − y_max)²]`. The variance
/// is written through both tails so it stays accurate for `|z| ≫ 1`.
pub fn monte_carlo_ei_exact_se(mu: f64, sigma: f64, y_max: f64, draws: usize) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let z = (mu - y_max) / sigma;
    let cdf = 0.5 * libm::erfc(-z / std::f64::consts::SQRT_2);
    let upper = 0.5 * libm::erfc(z / std::f64::consts::SQRT_2);
    let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let unit_var = z * z * cdf * upper + cdf + z * pdf * (upper - cdf) - pdf * pdf;
    sigma * (unit_var.max(0.0) / draws as f64).sqrt()
}
