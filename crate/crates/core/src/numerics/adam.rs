//! Adam with bias correction.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct AdamState<T> {
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
    step: u64,
    first: Vec<Vec<T>>,
    second: Vec<Vec<T>>,
}

impl<T: Real> AdamState<T> {
    pub const BETA1: f64 = 0.9;
    pub const BETA2: f64 = 0.999;
    pub const EPSILON: f64 = 1e-8;

    /// One moment buffer per parameter tensor, sized by `lens`.
    pub fn new(lens: &[usize], learning_rate: T) -> Self {
        Self {
            learning_rate,
            beta1: T::of(Self::BETA1),
            beta2: T::of(Self::BETA2),
            epsilon: T::of(Self::EPSILON),
            step: 0,
            first: lens.iter().map(|&n| vec![T::zero(); n]).collect(),
            second: lens.iter().map(|&n| vec![T::zero(); n]).collect(),
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Applies one update. Nothing is modified if any gradient is non-finite.
    pub fn step(&mut self, params: &mut [&mut [T]], grads: &[&[T]]) -> Result<()> {
        if params.len() != self.first.len() || grads.len() != self.first.len() {
            return Err(Error::DimensionMismatch {
                context: "adam tensor count".into(),
                expected: self.first.len(),
                found: params.len().min(grads.len()),
            });
        }
        for (k, (p, g)) in params.iter().zip(grads).enumerate() {
            if p.len() != self.first[k].len() || g.len() != p.len() {
                return Err(Error::DimensionMismatch {
                    context: format!("adam tensor {k}"),
                    expected: self.first[k].len(),
                    found: g.len(),
                });
            }
            if g.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteGradient(format!("tensor {k}")));
            }
        }

        self.step += 1;
        let t = self.step as i32;
        let one = T::one();
        let bias1 = one - self.beta1.powi(t);
        let bias2 = one - self.beta2.powi(t);
        for (k, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            let m = &mut self.first[k];
            let v = &mut self.second[k];
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = self.beta1 * m[i] + (one - self.beta1) * gi;
                v[i] = self.beta2 * v[i] + (one - self.beta2) * gi * gi;
                let m_hat = m[i] / bias1;
                let v_hat = v[i] / bias2;
                p[i] = p[i] - self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
        Ok(())
    }
}
