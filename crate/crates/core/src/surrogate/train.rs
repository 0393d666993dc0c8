//! Full-batch training of the surrogate with Adam.

use rayon::prelude::*;

use super::config::SurrogateConfig;
use super::forward::{backward, forward, ComposedGrads, ComposedWeights, GraphInput, Mode};
use super::params::SurrogateParams;
use crate::error::{Error, Result};
use crate::numerics::AdamState;
use crate::scalar::Real;

/// Samples per parallel work unit. Fixed so that summation order, and hence
/// the result, does not depend on the thread count.
const CHUNK: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrainOptions {
    pub epochs: usize,
    /// Keys the dropout masks.
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub epochs: usize,
    pub initial_loss: f64,
    pub final_loss: f64,
    /// Epoch whose parameters were kept (`epochs` means after the last step).
    pub kept_epoch: usize,
}

pub(crate) fn mix(seed: u64, a: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ a.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `Σ (ŷ − y)² + γ‖Ω‖²` with predict-mode outputs.
pub fn loss<T: Real>(batch: &[(&GraphInput<T>, T)], params: &SurrogateParams<T>, config: &SurrogateConfig) -> Result<T> {
    if batch.is_empty() {
        return Err(Error::Config("empty training batch".into()));
    }
    let composed = ComposedWeights::new(params);
    let mut data = T::zero();
    for (input, y) in batch {
        let out = forward(input, params, &composed, config, Mode::Predict)?;
        let r = out.prediction - *y;
        data = data + r * r;
    }
    Ok(data + T::of(config.penalty) * params.squared_norm())
}

/// Loss and its gradient with respect to every parameter tensor.
pub fn batch_gradient<T: Real>(
    batch: &[(&GraphInput<T>, T)],
    params: &SurrogateParams<T>,
    config: &SurrogateConfig,
    dropout_seed: u64,
) -> Result<(T, SurrogateParams<T>)> {
    if batch.is_empty() {
        return Err(Error::Config("empty training batch".into()));
    }
    let composed = ComposedWeights::new(params);
    let partials: Vec<Result<(T, ComposedGrads<T>)>> = batch
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, chunk)| {
            let mut grads = ComposedGrads::zeros(params, &composed);
            let mut data = T::zero();
            for (k, (input, y)) in chunk.iter().enumerate() {
                let index = (c * CHUNK + k) as u64;
                let mode = Mode::Train {
                    dropout_seed: mix(dropout_seed, index),
                };
                let out = forward(input, params, &composed, config, mode)?;
                let trace = out.trace.expect("training mode records a trace");
                let r = out.prediction - *y;
                data = data + r * r;
                backward(input, params, &composed, config, &trace, T::of(2.0) * r, &mut grads);
            }
            Ok((data, grads))
        })
        .collect();

    let mut total = T::zero();
    let mut acc: Option<ComposedGrads<T>> = None;
    for p in partials {
        let (data, grads) = p?;
        total = total + data;
        match acc.as_mut() {
            None => acc = Some(grads),
            Some(a) => a.add_assign(&grads),
        }
    }
    let mut grads = acc.expect("non-empty batch").into_param_grads(params);
    let gamma = T::of(config.penalty);
    if gamma > T::zero() {
        let two_gamma = T::of(2.0) * gamma;
        for (g, (_, p)) in grads.tensors_mut().into_iter().zip(params.tensors()) {
            g.axpy(two_gamma, p);
        }
    }
    Ok((total + gamma * params.squared_norm(), grads))
}

/// Trains in place for `options.epochs` full-batch Adam steps and keeps the
/// lowest-loss parameters encountered, so the returned loss never exceeds
/// the starting loss.
pub fn train<T: Real>(
    batch: &[(&GraphInput<T>, T)],
    params: &mut SurrogateParams<T>,
    config: &SurrogateConfig,
    options: TrainOptions,
) -> Result<TrainReport> {
    config.validate()?;
    if options.epochs == 0 {
        let l = loss(batch, params, config)?.as_f64();
        return Ok(TrainReport {
            epochs: 0,
            initial_loss: l,
            final_loss: l,
            kept_epoch: 0,
        });
    }

    let lens: Vec<usize> = params.tensors().iter().map(|(_, m)| m.as_slice().len()).collect();
    let mut adam = AdamState::new(&lens, T::of(config.learning_rate));
    // Without dropout the best epoch is kept; with dropout only the endpoints are compared.
    let track_epochs = config.dropout == 0.0;
    let mut initial_loss = None;
    let mut best: Option<(f64, usize, SurrogateParams<T>)> = None;

    for epoch in 0..options.epochs {
        let (l, grads) = batch_gradient(batch, params, config, mix(options.seed, epoch as u64))?;
        let l = l.as_f64();
        if !l.is_finite() {
            return Err(Error::TrainingDiverged { epoch, loss: l });
        }
        if epoch == 0 {
            let start = if track_epochs { l } else { loss(batch, params, config)?.as_f64() };
            initial_loss = Some(start);
            best = Some((start, 0, params.clone()));
        } else if track_epochs && best.as_ref().is_some_and(|b| l < b.0) {
            best = Some((l, epoch, params.clone()));
        }
        let grad_slices: Vec<&[T]> = grads.tensors().into_iter().map(|(_, m)| m.as_slice()).collect();
        let mut param_slices: Vec<&mut [T]> = params.tensors_mut().into_iter().map(|m| m.as_mut_slice()).collect();
        adam.step(&mut param_slices, &grad_slices)?;
    }

    let final_loss = loss(batch, params, config)?.as_f64();
    if !final_loss.is_finite() {
        return Err(Error::TrainingDiverged {
            epoch: options.epochs,
            loss: final_loss,
        });
    }
    let initial_loss = initial_loss.expect("at least one epoch ran");
    let (best_loss, best_epoch, best_params) = best.expect("at least one epoch ran");
    if best_loss < final_loss {
        *params = best_params;
        return Ok(TrainReport {
            epochs: options.epochs,
            initial_loss,
            final_loss: best_loss,
            kept_epoch: best_epoch,
        });
    }
    Ok(TrainReport {
        epochs: options.epochs,
        initial_loss,
        final_loss,
        kept_epoch: options.epochs,
    })
}
