//! Graph-convolutional surrogate: convolution with basis-shared relation
//! weights, softmax pooling, global-attribute concatenation, dense layers and
//! a linear training head whose input doubles as the basis for the Bayesian
//! head.

mod checkpoint;
mod config;
mod forward;
mod params;
pub(crate) mod train;

pub use checkpoint::{Checkpoint, NamedTensor};
pub use config::SurrogateConfig;
pub use forward::{
    backward, forward, gc_layer_forward, pooling_forward, prior_concat, ComposedGrads, ComposedWeights,
    ForwardOutput, ForwardTrace, GraphInput, Mode,
};
pub use params::{DenseParams, GcLayerParams, SurrogateParams};
pub use train::{batch_gradient, loss, train, TrainOptions, TrainReport};
