use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Activation;

/// Architecture and training hyperparameters of the graph surrogate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurrogateConfig {
    pub num_gc_layers: usize,
    pub num_fc_layers: usize,
    pub gc_width: usize,
    pub pool_width: usize,
    pub fc_width: usize,
    pub gc_activation: Activation,
    pub pool_activation: Activation,
    pub fc_activation: Activation,
    pub learning_rate: f64,
    pub dropout: f64,
    /// Weight of the squared L2 norm of all parameters in the loss.
    pub penalty: f64,
    pub num_bases: usize,
    /// Whether global attributes enter the concatenation (otherwise zeros).
    pub use_global: bool,
    pub num_relations: usize,
    pub input_dim: usize,
    pub global_dim: usize,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            num_gc_layers: 5,
            num_fc_layers: 5,
            gc_width: 48,
            pool_width: 50,
            fc_width: 45,
            gc_activation: Activation::Tanh,
            pool_activation: Activation::Identity,
            fc_activation: Activation::Tanh,
            learning_rate: 1e-4,
            dropout: 0.0,
            penalty: 1e-5,
            num_bases: 4,
            use_global: true,
            num_relations: 1,
            input_dim: 1,
            global_dim: 0,
        }
    }
}

impl SurrogateConfig {
    /// Default architecture sized for a pool's dimensions.
    pub fn for_dims(input_dim: usize, num_relations: usize, global_dim: usize) -> Self {
        Self {
            input_dim,
            num_relations,
            global_dim,
            ..Self::default()
        }
    }

    /// Length of the basis vector handed to the Bayesian head (last hidden
    /// layer plus a constant).
    pub fn basis_dim(&self) -> usize {
        self.fc_width + 1
    }

    pub fn concat_dim(&self) -> usize {
        self.pool_width + self.global_dim
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("num_gc_layers", self.num_gc_layers),
            ("num_fc_layers", self.num_fc_layers),
            ("gc_width", self.gc_width),
            ("pool_width", self.pool_width),
            ("fc_width", self.fc_width),
            ("num_bases", self.num_bases),
            ("num_relations", self.num_relations),
            ("input_dim", self.input_dim),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !(self.penalty >= 0.0) || !self.penalty.is_finite() {
            return Err(Error::Config("penalty must be non-negative".into()));
        }
        Ok(())
    }
}
