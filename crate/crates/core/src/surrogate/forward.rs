//! Forward pass, recorded trace and the hand-derived backward pass.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::SurrogateConfig;
use super::params::{DenseParams, SurrogateParams};
use crate::error::{Error, Result};
use crate::graph::{normalized_adjacency, AttributedGraph, NormalizedAdjacency};
use crate::numerics::mat::{matmul_acc, matmul_nt_acc, matmul_tn_acc};
use crate::numerics::{dot, row_softmax, row_softmax_backward, Activation, Mat, SparseRows};
use crate::scalar::Real;

/// A graph prepared for the network: normalized adjacencies, node features
/// and global attributes in the working scalar type.
#[derive(Clone, Debug)]
pub struct GraphInput<T> {
    pub id: u64,
    pub adjacency: NormalizedAdjacency<T>,
    pub features: SparseRows<T>,
    pub global: Vec<T>,
}

impl<T: Real> GraphInput<T> {
    pub fn new(graph: &AttributedGraph, num_relations: usize) -> Result<Self> {
        Ok(Self {
            id: graph.id,
            adjacency: normalized_adjacency(graph, num_relations)?,
            features: graph.node_features.cast(),
            global: graph.global_attributes.iter().map(|&x| T::of(x)).collect(),
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.features.rows()
    }

    fn check(&self, config: &SurrogateConfig) -> Result<()> {
        let checks = [
            ("node-feature width", config.input_dim, self.features.cols()),
            ("relation count", config.num_relations, self.adjacency.num_relations()),
            ("global attributes", config.global_dim, self.global.len()),
            ("adjacency size", self.features.rows(), self.adjacency.num_nodes()),
        ];
        for (what, expected, found) in checks {
            if expected != found {
                return Err(Error::DimensionMismatch {
                    context: format!("graph {} {what}", self.id),
                    expected,
                    found,
                });
            }
        }
        Ok(())
    }
}

/// Per-layer, per-relation weights composed from the bases.
#[derive(Clone, Debug)]
pub struct ComposedWeights<T> {
    pub gc: Vec<Vec<Mat<T>>>,
}

impl<T: Real> ComposedWeights<T> {
    pub fn new(params: &SurrogateParams<T>) -> Self {
        Self {
            gc: (0..params.gc.len())
                .map(|l| params.compose_relation_weights(l))
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Predict,
    /// Records a trace; `dropout_seed` keys the dropout masks.
    Train { dropout_seed: u64 },
}

/// Cached intermediate values of one training-mode forward pass.
#[derive(Clone, Debug)]
pub struct ForwardTrace<T> {
    gc_pre: Vec<Mat<T>>,
    gc_post: Vec<Mat<T>>,
    pool_softmax: Mat<T>,
    pool_pre: Vec<T>,
    pool_post: Vec<T>,
    concat: Vec<T>,
    fc_pre: Vec<Vec<T>>,
    fc_post: Vec<Vec<T>>,
    fc_masks: Vec<Option<Vec<T>>>,
}

#[derive(Clone, Debug)]
pub struct ForwardOutput<T> {
    /// Output of the linear training head.
    pub prediction: T,
    /// Last hidden layer with a trailing constant 1.
    pub basis: Vec<T>,
    pub trace: Option<ForwardTrace<T>>,
}

/// `σ(Σ_r Â_r H W_r)` for a dense input.
pub fn gc_layer_forward<T: Real>(
    h: &Mat<T>,
    adjacency: &NormalizedAdjacency<T>,
    weights: &[Mat<T>],
    activation: Activation,
) -> Result<Mat<T>> {
    let pre = gc_pre_dense(h, adjacency, weights)?;
    Ok(activation.apply(&pre))
}

fn gc_pre_dense<T: Real>(
    h: &Mat<T>,
    adjacency: &NormalizedAdjacency<T>,
    weights: &[Mat<T>],
) -> Result<Mat<T>> {
    if weights.len() != adjacency.num_relations() {
        return Err(Error::DimensionMismatch {
            context: "relation weights".into(),
            expected: adjacency.num_relations(),
            found: weights.len(),
        });
    }
    let out_dim = weights.first().map_or(0, Mat::cols);
    let mut pre = Mat::zeros(h.rows(), out_dim);
    for (a, w) in adjacency.per_relation.iter().zip(weights) {
        if a.rows() != h.rows() {
            return Err(Error::Shape {
                op: "gc_layer",
                lhs: a.shape(),
                rhs: h.shape(),
            });
        }
        let hw = h.matmul(w)?;
        matmul_acc(a, &hw, &mut pre);
    }
    Ok(pre)
}

fn gc_pre_sparse<T: Real>(
    h: &SparseRows<T>,
    adjacency: &NormalizedAdjacency<T>,
    weights: &[Mat<T>],
) -> Mat<T> {
    let out_dim = weights[0].cols();
    let mut pre = Mat::zeros(h.rows(), out_dim);
    for (a, w) in adjacency.per_relation.iter().zip(weights) {
        let hw = h.mul_dense(w);
        matmul_acc(a, &hw, &mut pre);
    }
    pre
}

/// `σ(sum_row(softmax(H W_pool)))`, returning the pre-activation too.
pub fn pooling_forward<T: Real>(h: &Mat<T>, weight: &Mat<T>, activation: Activation) -> Result<Vec<T>> {
    let z = h.matmul(weight)?;
    let pre = row_softmax(&z).sum_rows();
    Ok(pre.into_iter().map(|x| activation.apply_scalar(x)).collect())
}

/// Concatenates the pooled vector with `F_G`, or with zeros when the
/// switch is off. The output width is the same either way.
pub fn prior_concat<T: Real>(pooled: &[T], global: &[T], use_global: bool, global_dim: usize) -> Result<Vec<T>> {
    if global.len() != global_dim {
        return Err(Error::DimensionMismatch {
            context: "global attributes".into(),
            expected: global_dim,
            found: global.len(),
        });
    }
    let mut out = Vec::with_capacity(pooled.len() + global_dim);
    out.extend_from_slice(pooled);
    if use_global {
        out.extend_from_slice(global);
    } else {
        out.extend(std::iter::repeat_n(T::zero(), global_dim));
    }
    Ok(out)
}

fn affine<T: Real>(x: &[T], layer: &DenseParams<T>) -> Vec<T> {
    let mut out = layer.bias.as_slice().to_vec();
    for (i, &xi) in x.iter().enumerate() {
        if xi == T::zero() {
            continue;
        }
        for (o, &w) in out.iter_mut().zip(layer.weight.row(i)) {
            *o = *o + xi * w;
        }
    }
    out
}

pub fn forward<T: Real>(
    input: &GraphInput<T>,
    params: &SurrogateParams<T>,
    composed: &ComposedWeights<T>,
    config: &SurrogateConfig,
    mode: Mode,
) -> Result<ForwardOutput<T>> {
    input.check(config)?;
    let record = matches!(mode, Mode::Train { .. });

    let mut gc_pre = Vec::with_capacity(params.gc.len());
    let mut gc_post = Vec::with_capacity(params.gc.len());
    let mut h: Option<Mat<T>> = None;
    for weights in &composed.gc {
        let pre = match &h {
            None => gc_pre_sparse(&input.features, &input.adjacency, weights),
            Some(h) => gc_pre_dense(h, &input.adjacency, weights)?,
        };
        let post = config.gc_activation.apply(&pre);
        if record {
            gc_pre.push(pre);
            gc_post.push(post.clone());
        }
        h = Some(post);
    }
    let h_last = h.as_ref().expect("at least one graph-convolution layer");

    let z = h_last.matmul(&params.pool)?;
    let softmax = row_softmax(&z);
    let pool_pre = softmax.sum_rows();
    let pool_post: Vec<T> = pool_pre
        .iter()
        .map(|&x| config.pool_activation.apply_scalar(x))
        .collect();

    let concat = prior_concat(&pool_post, &input.global, config.use_global, config.global_dim)?;

    let mut rng = match mode {
        Mode::Train { dropout_seed } if config.dropout > 0.0 => Some(ChaCha8Rng::seed_from_u64(dropout_seed)),
        _ => None,
    };
    let keep_scale = T::one() / T::of(1.0 - config.dropout);
    let mut fc_pre = Vec::with_capacity(params.fc.len());
    let mut fc_post = Vec::with_capacity(params.fc.len());
    let mut fc_masks = Vec::with_capacity(params.fc.len());
    let mut a = concat.clone();
    for layer in &params.fc {
        let pre = affine(&a, layer);
        let mut post: Vec<T> = pre.iter().map(|&x| config.fc_activation.apply_scalar(x)).collect();
        let mask = rng.as_mut().map(|rng| {
            (0..post.len())
                .map(|_| {
                    if rng.gen::<f64>() < config.dropout {
                        T::zero()
                    } else {
                        keep_scale
                    }
                })
                .collect::<Vec<T>>()
        });
        if let Some(m) = &mask {
            post.iter_mut().zip(m).for_each(|(p, &k)| *p = *p * k);
        }
        a = post.clone();
        if record {
            fc_pre.push(pre);
            fc_post.push(post);
            fc_masks.push(mask);
        }
    }

    let prediction = affine(&a, &params.head)[0];
    let mut basis = a;
    basis.push(T::one());

    let trace = record.then_some(ForwardTrace {
        gc_pre,
        gc_post,
        pool_softmax: softmax,
        pool_pre,
        pool_post,
        concat,
        fc_pre,
        fc_post,
        fc_masks,
    });
    Ok(ForwardOutput {
        prediction,
        basis,
        trace,
    })
}

/// Gradients with respect to the composed per-relation weights; mapped back
/// to bases and coefficients by [`ComposedGrads::into_param_grads`].
#[derive(Clone, Debug)]
pub struct ComposedGrads<T> {
    pub gc: Vec<Vec<Mat<T>>>,
    pub pool: Mat<T>,
    pub fc: Vec<DenseParams<T>>,
    pub head: DenseParams<T>,
}

impl<T: Real> ComposedGrads<T> {
    pub fn zeros(params: &SurrogateParams<T>, composed: &ComposedWeights<T>) -> Self {
        let z = |m: &Mat<T>| Mat::zeros(m.rows(), m.cols());
        let zd = |d: &DenseParams<T>| DenseParams {
            weight: z(&d.weight),
            bias: z(&d.bias),
        };
        Self {
            gc: composed.gc.iter().map(|ws| ws.iter().map(z).collect()).collect(),
            pool: z(&params.pool),
            fc: params.fc.iter().map(zd).collect(),
            head: zd(&params.head),
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.gc.iter_mut().zip(&other.gc) {
            for (x, y) in a.iter_mut().zip(b) {
                x.add_assign(y);
            }
        }
        self.pool.add_assign(&other.pool);
        for (a, b) in self.fc.iter_mut().zip(&other.fc) {
            a.weight.add_assign(&b.weight);
            a.bias.add_assign(&b.bias);
        }
        self.head.weight.add_assign(&other.head.weight);
        self.head.bias.add_assign(&other.head.bias);
    }

    /// Chain rule through `W_r = Σ_b β_{r,b} V_b`.
    pub fn into_param_grads(self, params: &SurrogateParams<T>) -> SurrogateParams<T> {
        let mut out = params.zeros_like();
        for (l, d_ws) in self.gc.iter().enumerate() {
            let layer = &params.gc[l];
            let target = &mut out.gc[l];
            for (r, d_w) in d_ws.iter().enumerate() {
                for (b, basis) in layer.bases.iter().enumerate() {
                    let beta = layer.coefficients[(r, b)];
                    target.bases[b].axpy(beta, d_w);
                    let inner = dot(d_w.as_slice(), basis.as_slice());
                    target.coefficients[(r, b)] = target.coefficients[(r, b)] + inner;
                }
            }
        }
        out.pool = self.pool;
        out.fc = self.fc;
        out.head = self.head;
        out
    }
}

fn dense_backward<T: Real>(x: &[T], dz: &[T], layer: &DenseParams<T>, grad: &mut DenseParams<T>) -> Vec<T> {
    for (i, &xi) in x.iter().enumerate() {
        if xi == T::zero() {
            continue;
        }
        for (g, &d) in grad.weight.row_mut(i).iter_mut().zip(dz) {
            *g = *g + xi * d;
        }
    }
    for (g, &d) in grad.bias.as_mut_slice().iter_mut().zip(dz) {
        *g = *g + d;
    }
    (0..x.len()).map(|i| dot(layer.weight.row(i), dz)).collect()
}

/// Accumulates `d_prediction · ∂ŷ/∂(weights)` into `grads`.
pub fn backward<T: Real>(
    input: &GraphInput<T>,
    params: &SurrogateParams<T>,
    composed: &ComposedWeights<T>,
    config: &SurrogateConfig,
    trace: &ForwardTrace<T>,
    d_prediction: T,
    grads: &mut ComposedGrads<T>,
) {
    // head
    let last = trace.fc_post.last().unwrap_or(&trace.concat);
    let mut da = dense_backward(last, &[d_prediction], &params.head, &mut grads.head);

    // fully connected, last to first
    for k in (0..params.fc.len()).rev() {
        if let Some(mask) = &trace.fc_masks[k] {
            da.iter_mut().zip(mask).for_each(|(d, &m)| *d = *d * m);
        }
        let pre = &trace.fc_pre[k];
        let unmasked: Vec<T> = pre.iter().map(|&x| config.fc_activation.apply_scalar(x)).collect();
        let dz: Vec<T> = da
            .iter()
            .zip(pre)
            .zip(&unmasked)
            .map(|((&d, &x), &y)| d * config.fc_activation.derivative_scalar(x, y))
            .collect();
        let x = if k == 0 { &trace.concat } else { &trace.fc_post[k - 1] };
        da = dense_backward(x, &dz, &params.fc[k], &mut grads.fc[k]);
    }

    // pooling: every softmax row receives the same upstream gradient
    let pool_width = params.pool.cols();
    let d_pool_pre: Vec<T> = da[..pool_width]
        .iter()
        .zip(&trace.pool_pre)
        .zip(&trace.pool_post)
        .map(|((&d, &x), &y)| d * config.pool_activation.derivative_scalar(x, y))
        .collect();
    let n = trace.pool_softmax.rows();
    let mut d_softmax = Mat::zeros(n, pool_width);
    for i in 0..n {
        d_softmax.row_mut(i).copy_from_slice(&d_pool_pre);
    }
    let dz = row_softmax_backward(&trace.pool_softmax, &d_softmax);
    let h_last = trace.gc_post.last().expect("trace has graph-convolution layers");
    matmul_tn_acc(h_last, &dz, &mut grads.pool);
    let mut dh = Mat::zeros(n, params.pool.rows());
    matmul_nt_acc(&dz, &params.pool, &mut dh);

    // graph convolution, last to first
    for l in (0..composed.gc.len()).rev() {
        let g = config
            .gc_activation
            .backprop(&trace.gc_pre[l], &trace.gc_post[l], &dh);
        let weights = &composed.gc[l];
        let mut dh_in = (l > 0).then(|| Mat::zeros(n, weights[0].rows()));
        for (r, a) in input.adjacency.per_relation.iter().enumerate() {
            let mut q = Mat::zeros(n, g.cols());
            matmul_acc(a, &g, &mut q);
            if l == 0 {
                input.features.tr_mul_acc(&q, &mut grads.gc[l][r]);
            } else {
                matmul_tn_acc(&trace.gc_post[l - 1], &q, &mut grads.gc[l][r]);
            }
            if let Some(dh_in) = dh_in.as_mut() {
                matmul_nt_acc(&q, &weights[r], dh_in);
            }
        }
        if let Some(next) = dh_in {
            dh = next;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::AttributedGraph;

    fn tiny_config(global_dim: usize) -> SurrogateConfig {
        SurrogateConfig {
            num_gc_layers: 1,
            num_fc_layers: 1,
            gc_width: 2,
            pool_width: 2,
            fc_width: 2,
            num_bases: 1,
            num_relations: 1,
            input_dim: 1,
            global_dim,
            ..SurrogateConfig::default()
        }
    }

    #[test]
    fn gc_identity_on_single_node() {
        let g = AttributedGraph::from_edge_list(0, 1, &[]);
        let a = normalized_adjacency::<f64>(&g, 1).unwrap();
        let h = Mat::from_rows(&[[0.3, -0.7]]);
        let out = gc_layer_forward(&h, &a, &[Mat::identity(2)], Activation::Identity).unwrap();
        assert_eq!(out, h);
    }

    #[test]
    fn gc_edge_mixes_endpoints() {
        let g = AttributedGraph::from_edge_list(0, 2, &[(0, 1)]);
        let a = normalized_adjacency::<f64>(&g, 1).unwrap();
        let h = Mat::from_rows(&[[1.0, 0.0], [0.0, 3.0]]);
        let out = gc_layer_forward(&h, &a, &[Mat::identity(2)], Activation::Identity).unwrap();
        assert_eq!(out, Mat::from_rows(&[[0.5, 1.5], [0.5, 1.5]]));
    }

    #[test]
    fn gc_empty_relation_adds_self_term() {
        let g = AttributedGraph::from_edge_list(0, 3, &[(0, 1), (1, 2)]);
        let a = normalized_adjacency::<f64>(&g, 2).unwrap();
        let h = Mat::from_rows(&[[1.0, 2.0], [0.5, -1.0], [0.0, 4.0]]);
        let w1 = Mat::from_rows(&[[0.2, -0.4], [1.0, 0.3]]);
        let w2 = Mat::from_rows(&[[0.7, 0.1], [-0.2, 0.5]]);
        let both = gc_layer_forward(&h, &a, &[w1.clone(), w2.clone()], Activation::Identity).unwrap();
        let single = NormalizedAdjacency {
            per_relation: vec![a.per_relation[0].clone()],
        };
        let expected = gc_layer_forward(&h, &single, &[w1], Activation::Identity)
            .unwrap()
            .add(&h.matmul(&w2).unwrap())
            .unwrap();
        assert!(both.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn pooling_examples() {
        let w = Mat::from_rows(&[[0.0f64, 0.0]]);
        let single = pooling_forward(&Mat::from_rows(&[[1.5]]), &w, Activation::Identity).unwrap();
        assert_eq!(single, vec![0.5, 0.5]);

        let w = Mat::from_rows(&[[0.3f64, -1.0, 2.0], [0.5, 0.1, -0.2]]);
        let row = [0.4, -0.9];
        let one = pooling_forward(&Mat::from_rows(&[row]), &w, Activation::Identity).unwrap();
        let three = pooling_forward(&Mat::from_rows(&[row, row, row]), &w, Activation::Identity).unwrap();
        for (a, b) in one.iter().zip(&three) {
            assert!((3.0 * a - b).abs() < 1e-15);
        }

        let h = Mat::from_rows(&[[0.4f64, -0.9], [1.2, 0.3]]);
        let pooled = pooling_forward(&h, &w, Activation::Identity).unwrap();
        let z = h.matmul(&w).unwrap();
        for j in 0..3 {
            let mut total = 0.0f64;
            for i in 0..2 {
                let denom: f64 = (0..3).map(|k| z[(i, k)].exp()).sum();
                total += z[(i, j)].exp() / denom;
            }
            assert!((pooled[j] - total).abs() < 1e-15);
        }
    }

    #[test]
    fn concat_switch() {
        let pooled = [0.1, 0.9, 0.4];
        let g = [0.2, 0.8];
        assert_eq!(prior_concat(&pooled, &g, false, 2).unwrap(), vec![0.1, 0.9, 0.4, 0.0, 0.0]);
        assert_eq!(prior_concat(&pooled, &g, true, 2).unwrap(), vec![0.1, 0.9, 0.4, 0.2, 0.8]);
        assert!(prior_concat(&pooled, &g, true, 3).is_err());
    }

    #[test]
    fn zero_params_give_head_bias() {
        let config = SurrogateConfig {
            num_relations: 1,
            input_dim: 1,
            global_dim: 1,
            ..SurrogateConfig::default()
        };
        let mut params = SurrogateParams::<f64>::init(&config, 0).unwrap();
        for t in params.tensors_mut() {
            t.fill(0.0);
        }
        params.head.bias[(0, 0)] = 0.75;
        let mut g = AttributedGraph::from_edge_list(0, 3, &[(0, 1)]);
        g.global_attributes = vec![0.5];
        let input = GraphInput::new(&g, 1).unwrap();
        let out = forward(&input, &params, &ComposedWeights::new(&params), &config, Mode::Predict).unwrap();
        assert_eq!(out.prediction, 0.75);
        assert_eq!(out.basis.len(), 46);
        assert!(out.basis[..45].iter().all(|&x| x == 0.0));
        assert_eq!(out.basis[45], 1.0);
        assert!(out.trace.is_none());
    }

    #[test]
    fn tiny_network_by_hand() {
        // path 0-1-2, one GC layer of width 2, pooling width 2, one FC of width 2
        let config = tiny_config(1);
        let mut params = SurrogateParams::<f64>::init(&config, 0).unwrap();
        params.gc[0].bases[0] = Mat::from_rows(&[[0.5, -0.25]]);
        params.gc[0].coefficients = Mat::from_rows(&[[2.0]]);
        params.pool = Mat::from_rows(&[[1.0, -1.0], [0.5, 2.0]]);
        params.fc[0].weight = Mat::from_rows(&[[0.3, -0.2], [0.1, 0.4], [-0.5, 0.6]]);
        params.fc[0].bias = Mat::from_rows(&[[0.05, -0.05]]);
        params.head.weight = Mat::from_rows(&[[1.5], [-0.7]]);
        params.head.bias = Mat::from_rows(&[[0.2]]);
        let mut g = AttributedGraph::from_edge_list(0, 3, &[(0, 1), (1, 2)]);
        g.global_attributes = vec![0.6];
        let input = GraphInput::new(&g, 1).unwrap();
        let out = forward(&input, &params, &ComposedWeights::new(&params), &config, Mode::Predict).unwrap();

        // by hand: features are all ones, W = 2·(0.5, −0.25) = (1, −0.5)
        let s6 = 1.0 / 6.0_f64.sqrt();
        let row_sums = [0.5 + s6, s6 + 1.0 / 3.0 + s6, s6 + 0.5];
        let h: Vec<[f64; 2]> = row_sums.iter().map(|&s| [(s * 1.0).tanh(), (s * -0.5).tanh()]).collect();
        let mut pooled = [0.0; 2];
        for hi in &h {
            let z = [hi[0] * 1.0 + hi[1] * 0.5, -hi[0] + hi[1] * 2.0];
            let m = z[0].max(z[1]);
            let e = [(z[0] - m).exp(), (z[1] - m).exp()];
            pooled[0] += e[0] / (e[0] + e[1]);
            pooled[1] += e[1] / (e[0] + e[1]);
        }
        let x = [pooled[0], pooled[1], 0.6];
        let a0 = (0.05 + 0.3 * x[0] + 0.1 * x[1] - 0.5 * x[2]).tanh();
        let a1 = (-0.05 - 0.2 * x[0] + 0.4 * x[1] + 0.6 * x[2]).tanh();
        let y = 0.2 + 1.5 * a0 - 0.7 * a1;
        assert!((out.prediction - y).abs() < 1e-14, "{} vs {y}", out.prediction);
        assert!((out.basis[0] - a0).abs() < 1e-15);
        assert!((out.basis[1] - a1).abs() < 1e-15);
        assert_eq!(out.basis[2], 1.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let config = tiny_config(2);
        let params = SurrogateParams::<f64>::init(&config, 0).unwrap();
        let g = AttributedGraph::from_edge_list(0, 3, &[(0, 1)]);
        let input = GraphInput::new(&g, 1).unwrap();
        let err = forward(&input, &params, &ComposedWeights::new(&params), &config, Mode::Predict);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }
}
