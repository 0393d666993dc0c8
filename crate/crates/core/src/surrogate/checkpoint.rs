//! JSON checkpoints of named tensors. Values are written in shortest
//! round-trip form, so `f64` parameters reload bit-for-bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::SurrogateConfig;
use super::params::SurrogateParams;
use crate::error::{Error, Result};
use crate::numerics::Mat;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config: SurrogateConfig,
    pub tensors: Vec<NamedTensor>,
}

impl Checkpoint {
    pub fn capture<T: Real>(config: &SurrogateConfig, params: &SurrogateParams<T>) -> Self {
        Self {
            config: config.clone(),
            tensors: params
                .tensors()
                .into_iter()
                .map(|(name, m)| NamedTensor {
                    name,
                    rows: m.rows(),
                    cols: m.cols(),
                    data: m.as_slice().iter().map(|x| x.as_f64()).collect(),
                })
                .collect(),
        }
    }

    /// Rebuilds parameters, checking every name and shape against the config.
    pub fn restore<T: Real>(&self) -> Result<SurrogateParams<T>> {
        let mut params = SurrogateParams::<T>::init(&self.config, 0)?;
        let expected: Vec<(String, (usize, usize))> = params
            .tensors()
            .into_iter()
            .map(|(n, m)| (n, m.shape()))
            .collect();
        if expected.len() != self.tensors.len() {
            return Err(Error::DimensionMismatch {
                context: "checkpoint tensor count".into(),
                expected: expected.len(),
                found: self.tensors.len(),
            });
        }
        for ((slot, (name, shape)), t) in params.tensors_mut().into_iter().zip(expected).zip(&self.tensors) {
            if t.name != name || (t.rows, t.cols) != shape {
                return Err(Error::Config(format!(
                    "checkpoint tensor `{}` {}x{} does not match expected `{name}` {}x{}",
                    t.name, t.rows, t.cols, shape.0, shape.1
                )));
            }
            *slot = Mat::from_vec(t.rows, t.cols, t.data.iter().map(|&x| T::of(x)).collect())?;
        }
        Ok(params)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, self)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_bitwise() {
        let config = SurrogateConfig {
            num_gc_layers: 2,
            num_fc_layers: 2,
            gc_width: 5,
            pool_width: 4,
            fc_width: 3,
            num_bases: 2,
            num_relations: 2,
            input_dim: 3,
            global_dim: 2,
            ..SurrogateConfig::default()
        };
        let mut params = SurrogateParams::<f64>::init(&config, 17).unwrap();
        params.head.bias[(0, 0)] = 0.1 + 0.2;
        params.fc[0].bias[(0, 1)] = f64::MIN_POSITIVE;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        Checkpoint::capture(&config, &params).save(&path).unwrap();
        let back: SurrogateParams<f64> = Checkpoint::load(&path).unwrap().restore().unwrap();
        for ((_, a), (_, b)) in params.tensors().into_iter().zip(back.tensors()) {
            let bits_a: Vec<u64> = a.as_slice().iter().map(|x| x.to_bits()).collect();
            let bits_b: Vec<u64> = b.as_slice().iter().map(|x| x.to_bits()).collect();
            assert_eq!(bits_a, bits_b);
        }
    }

    #[test]
    fn rejects_mismatched_shapes() {
        let config = SurrogateConfig {
            input_dim: 2,
            ..SurrogateConfig::default()
        };
        let params = SurrogateParams::<f64>::init(&config, 0).unwrap();
        let mut ckpt = Checkpoint::capture(&config, &params);
        ckpt.config.input_dim = 3;
        assert!(ckpt.restore::<f64>().is_err());
    }
}
