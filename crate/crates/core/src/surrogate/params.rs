//! Trainable parameters and their initialization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::SurrogateConfig;
use crate::error::Result;
use crate::numerics::Mat;
use crate::scalar::Real;

/// One graph-convolution layer: shared bases and per-relation mixing
/// coefficients, `W_r = Σ_b coefficients[r][b] · bases[b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GcLayerParams<T> {
    pub bases: Vec<Mat<T>>,
    /// `num_relations × num_bases`
    pub coefficients: Mat<T>,
}

/// Affine layer `x ↦ x·weight + bias` (row-vector convention).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseParams<T> {
    pub weight: Mat<T>,
    /// `1 × out`
    pub bias: Mat<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurrogateParams<T> {
    pub gc: Vec<GcLayerParams<T>>,
    /// `gc_width × pool_width`, no bias.
    pub pool: Mat<T>,
    pub fc: Vec<DenseParams<T>>,
    /// Linear training head; discarded once the Bayesian head takes over.
    pub head: DenseParams<T>,
}

fn glorot<T: Real>(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat<T> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Mat::from_fn(rows, cols, |_, _| T::of(rng.gen_range(-limit..=limit)))
}

impl<T: Real> SurrogateParams<T> {
    /// Glorot-uniform weights, zero biases; deterministic in `seed`.
    pub fn init(config: &SurrogateConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gc = Vec::with_capacity(config.num_gc_layers);
        let mut d_in = config.input_dim;
        for _ in 0..config.num_gc_layers {
            let bases = (0..config.num_bases)
                .map(|_| glorot(&mut rng, d_in, config.gc_width))
                .collect();
            let coefficients = glorot(&mut rng, config.num_relations, config.num_bases);
            gc.push(GcLayerParams { bases, coefficients });
            d_in = config.gc_width;
        }
        let pool = glorot(&mut rng, config.gc_width, config.pool_width);
        let mut fc = Vec::with_capacity(config.num_fc_layers);
        let mut d_in = config.concat_dim();
        for _ in 0..config.num_fc_layers {
            fc.push(DenseParams {
                weight: glorot(&mut rng, d_in, config.fc_width),
                bias: Mat::zeros(1, config.fc_width),
            });
            d_in = config.fc_width;
        }
        let head = DenseParams {
            weight: glorot(&mut rng, config.fc_width, 1),
            bias: Mat::zeros(1, 1),
        };
        Ok(Self { gc, pool, fc, head })
    }

    /// Same shapes, all zeros.
    pub fn zeros_like(&self) -> Self {
        let z = |m: &Mat<T>| Mat::zeros(m.rows(), m.cols());
        Self {
            gc: self
                .gc
                .iter()
                .map(|l| GcLayerParams {
                    bases: l.bases.iter().map(z).collect(),
                    coefficients: z(&l.coefficients),
                })
                .collect(),
            pool: z(&self.pool),
            fc: self
                .fc
                .iter()
                .map(|d| DenseParams {
                    weight: z(&d.weight),
                    bias: z(&d.bias),
                })
                .collect(),
            head: DenseParams {
                weight: z(&self.head.weight),
                bias: z(&self.head.bias),
            },
        }
    }

    /// Every tensor with a stable name, in a fixed order.
    pub fn tensors(&self) -> Vec<(String, &Mat<T>)> {
        let mut out = Vec::new();
        for (l, layer) in self.gc.iter().enumerate() {
            for (b, basis) in layer.bases.iter().enumerate() {
                out.push((format!("gc{l}.basis{b}"), basis));
            }
            out.push((format!("gc{l}.coefficients"), &layer.coefficients));
        }
        out.push(("pool.weight".to_string(), &self.pool));
        for (k, d) in self.fc.iter().enumerate() {
            out.push((format!("fc{k}.weight"), &d.weight));
            out.push((format!("fc{k}.bias"), &d.bias));
        }
        out.push(("head.weight".to_string(), &self.head.weight));
        out.push(("head.bias".to_string(), &self.head.bias));
        out
    }

    /// Mutable counterpart of [`tensors`](Self::tensors), same order.
    pub fn tensors_mut(&mut self) -> Vec<&mut Mat<T>> {
        let mut out = Vec::new();
        for layer in &mut self.gc {
            out.extend(layer.bases.iter_mut());
            out.push(&mut layer.coefficients);
        }
        out.push(&mut self.pool);
        for d in &mut self.fc {
            out.push(&mut d.weight);
            out.push(&mut d.bias);
        }
        out.push(&mut self.head.weight);
        out.push(&mut self.head.bias);
        out
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|(_, m)| m.as_slice().len()).sum()
    }

    pub fn squared_norm(&self) -> T {
        self.tensors().iter().map(|(_, m)| m.sum_squares()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, m)| m.is_finite())
    }

    /// `W_r^(l) = Σ_b β_{r,b} V_b` for every relation of layer `layer`.
    pub fn compose_relation_weights(&self, layer: usize) -> Vec<Mat<T>> {
        let l = &self.gc[layer];
        let (rows, cols) = l.bases[0].shape();
        (0..l.coefficients.rows())
            .map(|r| {
                let mut w = Mat::zeros(rows, cols);
                for (b, basis) in l.bases.iter().enumerate() {
                    let beta = l.coefficients[(r, b)];
                    if beta != T::zero() {
                        w.axpy(beta, basis);
                    }
                }
                w
            })
            .collect()
    }

    pub fn cast<U: Real>(&self) -> SurrogateParams<U> {
        SurrogateParams {
            gc: self
                .gc
                .iter()
                .map(|l| GcLayerParams {
                    bases: l.bases.iter().map(Mat::cast).collect(),
                    coefficients: l.coefficients.cast(),
                })
                .collect(),
            pool: self.pool.cast(),
            fc: self
                .fc
                .iter()
                .map(|d| DenseParams {
                    weight: d.weight.cast(),
                    bias: d.bias.cast(),
                })
                .collect(),
            head: DenseParams {
                weight: self.head.weight.cast(),
                bias: self.head.bias.cast(),
            },
        }
    }
}
