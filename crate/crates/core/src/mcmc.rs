//! Hyperparameter posterior for the BLR head, sampled with an
//! affine-invariant stretch-move ensemble.
//!
//! The sampler state lives in log space: `u = ln σw⁻²` and `v = ln σn²`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::blr::{BlrHyper, BlrPosterior, EvidenceCache};
use crate::error::{Error, Result};
use crate::numerics::Mat;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    /// Mean of the normal prior on `ln σw⁻²`.
    pub log_precision_mean: f64,
    /// Its standard deviation; `f64::INFINITY` makes the term flat.
    pub log_precision_std: f64,
    /// Horseshoe scale on `σn²`; `None` makes the term flat.
    pub horseshoe_scale: Option<f64>,
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self {
            log_precision_mean: -10.0,
            log_precision_std: 0.1,
            horseshoe_scale: Some(0.1),
        }
    }
}

impl PriorSpec {
    pub fn flat() -> Self {
        Self {
            log_precision_mean: 0.0,
            log_precision_std: f64::INFINITY,
            horseshoe_scale: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let scale_ok = self.horseshoe_scale.is_none_or(|t| t > 0.0 && t.is_finite());
        if !(self.log_precision_std > 0.0) || !self.log_precision_mean.is_finite() || !scale_ok {
            return Err(Error::Config(format!("invalid prior {self:?}")));
        }
        Ok(())
    }
}

/// `ln N(ln σw⁻²; μ₀, s₀²) + ln ln(1 + 2τ²/σn²)`, or `-∞` outside the domain.
pub fn log_prior<T: Real>(hyper: BlrHyper<T>, prior: &PriorSpec) -> T {
    let (w, n) = (hyper.weight_variance, hyper.noise_variance);
    if !(w > T::zero()) || !(n > T::zero()) {
        return T::neg_infinity();
    }
    let mut lp = T::zero();
    if prior.log_precision_std.is_finite() {
        let s = T::of(prior.log_precision_std);
        let z = (-w.ln() - T::of(prior.log_precision_mean)) / s;
        lp = lp - T::of(0.5) * z * z - s.ln() - T::of(0.5) * (T::of(2.0) * T::PI()).ln();
    }
    if let Some(tau) = prior.horseshoe_scale {
        let tau = T::of(tau);
        lp = lp + (T::one() + T::of(2.0) * tau * tau / n).ln().ln();
    }
    lp
}

/// Unnormalized `ln p(θ | Φ, y)`.
pub fn log_posterior<T: Real>(hyper: BlrHyper<T>, phi: &Mat<T>, y: &[T], prior: &PriorSpec) -> Result<T> {
    let lp = log_prior(hyper, prior);
    if lp == T::neg_infinity() {
        return Ok(lp);
    }
    Ok(BlrPosterior::fit(phi, y, hyper)?.log_marginal_likelihood() + lp)
}

fn hyper_from_log<T: Real>(x: &[T]) -> BlrHyper<T> {
    BlrHyper {
        weight_variance: (-x[0]).exp(),
        noise_variance: x[1].exp(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub walkers: usize,
    /// Stretch scale `a`.
    pub stretch: f64,
    pub burn_in: usize,
    /// Sweeps between retained draws.
    pub thin: usize,
    /// Consecutive sweeps without any accepted proposal before giving up.
    pub stuck_limit: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            walkers: 20,
            stretch: 2.0,
            burn_in: 200,
            thin: 10,
            stuck_limit: 50,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.walkers < 2 * dim.max(1) || !self.walkers.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "need an even number of at least {} walkers, got {}",
                2 * dim.max(1),
                self.walkers
            )));
        }
        if !(self.stretch > 1.0) || self.thin == 0 || self.stuck_limit == 0 {
            return Err(Error::Config(format!("invalid ensemble settings {self:?}")));
        }
        Ok(())
    }
}

/// Walker positions and their log densities.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble<T> {
    pub positions: Vec<Vec<T>>,
    pub log_probs: Vec<T>,
}

/// Goodman–Weare sampler over an arbitrary log density.
pub struct EnsembleSampler<T, F> {
    target: F,
    config: EnsembleConfig,
    state: Ensemble<T>,
    rng: ChaCha8Rng,
    dim: usize,
    idle_sweeps: usize,
    sweeps: usize,
    accepted: usize,
    proposed: usize,
}

impl<T: Real, F: Fn(&[T]) -> T> EnsembleSampler<T, F> {
    pub fn new(target: F, initial: Vec<Vec<T>>, config: EnsembleConfig, rng: ChaCha8Rng) -> Result<Self> {
        let dim = initial.first().map_or(0, Vec::len);
        config.validate(dim)?;
        if initial.len() != config.walkers || initial.iter().any(|p| p.len() != dim) {
            return Err(Error::Config(format!(
                "expected {} initial positions of equal dimension",
                config.walkers
            )));
        }
        let log_probs: Vec<T> = initial.iter().map(|p| target(p)).collect();
        if log_probs.iter().any(|lp| lp.is_nan() || *lp == T::neg_infinity()) {
            return Err(Error::Config("initial walker outside the support of the target".into()));
        }
        Ok(Self {
            target,
            config,
            state: Ensemble {
                positions: initial,
                log_probs,
            },
            rng,
            dim,
            idle_sweeps: 0,
            sweeps: 0,
            accepted: 0,
            proposed: 0,
        })
    }

    pub fn state(&self) -> &Ensemble<T> {
        &self.state
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    /// One sweep: each half of the ensemble is updated against the other.
    pub fn sweep(&mut self) -> Result<()> {
        let w = self.config.walkers;
        let half = w / 2;
        let a = self.config.stretch;
        let mut accepted = 0;
        for (lo, hi, other_lo) in [(0, half, half), (half, w, 0)] {
            for k in lo..hi {
                let j = other_lo + self.rng.gen_range(0..half);
                let u: f64 = self.rng.gen();
                let z = ((a - 1.0) * u + 1.0).powi(2) / a;
                let zt = T::of(z);
                let proposal: Vec<T> = self.state.positions[j]
                    .iter()
                    .zip(&self.state.positions[k])
                    .map(|(&xj, &xk)| xj + zt * (xk - xj))
                    .collect();
                let lp = (self.target)(&proposal);
                let log_ratio = T::of((self.dim as f64 - 1.0) * z.ln()) + lp - self.state.log_probs[k];
                let r: f64 = self.rng.gen();
                if !lp.is_nan() && log_ratio.as_f64() >= r.ln() {
                    self.state.positions[k] = proposal;
                    self.state.log_probs[k] = lp;
                    accepted += 1;
                }
            }
        }
        self.sweeps += 1;
        self.proposed += w;
        self.accepted += accepted;
        if accepted == 0 {
            self.idle_sweeps += 1;
            if self.idle_sweeps >= self.config.stuck_limit {
                return Err(Error::SamplerStuck(self.idle_sweeps));
            }
        } else {
            self.idle_sweeps = 0;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct HyperSample<T> {
    pub hyper: BlrHyper<T>,
    pub log_posterior: T,
    pub posterior: BlrPosterior<T>,
}

#[derive(Clone, Debug)]
pub struct HyperSampleSet<T> {
    pub samples: Vec<HyperSample<T>>,
}

impl<T: Real> HyperSampleSet<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Starting point in log space: the prior mode for `ln σw⁻²` and
/// `σn² = 0.1` for the noise.
pub fn initial_center(prior: &PriorSpec) -> [f64; 2] {
    [prior.log_precision_mean, 0.1f64.ln()]
}

/// Draws `num_samples` hyperparameters from `p(θ | Φ, y)` and fits a BLR
/// posterior for each.
pub fn sample_posterior<T: Real>(
    phi: &Mat<T>,
    y: &[T],
    num_samples: usize,
    prior: &PriorSpec,
    config: &EnsembleConfig,
    rng: ChaCha8Rng,
) -> Result<HyperSampleSet<T>> {
    let cache = EvidenceCache::new(phi, y)?;
    sample_posterior_cached(&cache, num_samples, prior, config, rng)
}

/// As [`sample_posterior`] with a prepared evidence cache.
pub fn sample_posterior_cached<T: Real>(
    cache: &EvidenceCache<T>,
    num_samples: usize,
    prior: &PriorSpec,
    config: &EnsembleConfig,
    mut rng: ChaCha8Rng,
) -> Result<HyperSampleSet<T>> {
    if num_samples == 0 {
        return Err(Error::Config("need at least one hyperparameter sample".into()));
    }
    prior.validate()?;
    let target = |x: &[T]| {
        let hyper = hyper_from_log(x);
        let lp = log_prior(hyper, prior);
        if !lp.is_finite() {
            return T::neg_infinity();
        }
        let lml = cache.log_marginal_likelihood(hyper);
        if lml.is_finite() {
            lml + lp + x[1]
        } else {
            T::neg_infinity()
        }
    };
    let jitter = Normal::new(0.0, 0.1).expect("valid normal");
    let center = initial_center(prior);
    let initial: Vec<Vec<T>> = (0..config.walkers)
        .map(|_| center.iter().map(|&c| T::of(c + jitter.sample(&mut rng))).collect())
        .collect();
    let stream = ChaCha8Rng::seed_from_u64(rng.gen());
    let mut sampler = EnsembleSampler::new(target, initial, *config, stream)?;
    for _ in 0..config.burn_in {
        sampler.sweep()?;
    }
    let mut samples = Vec::with_capacity(num_samples);
    while samples.len() < num_samples {
        for _ in 0..config.thin {
            sampler.sweep()?;
        }
        let k = samples.len() % config.walkers;
        let x = &sampler.state().positions[k];
        let hyper = hyper_from_log(x);
        let posterior = cache.posterior(hyper)?;
        samples.push(HyperSample {
            hyper,
            log_posterior: cache.log_marginal_likelihood(hyper) + log_prior(hyper, prior),
            posterior,
        });
    }
    Ok(HyperSampleSet { samples })
}
