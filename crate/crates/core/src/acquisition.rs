//! Expected improvement, its sum over hyperparameter samples, and
//! selection of the next graph.

use std::borrow::Cow;
use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mcmc::HyperSampleSet;
use crate::numerics::Mat;
use crate::scalar::{normal_cdf, normal_pdf, Real};
use crate::surrogate::{forward, ComposedWeights, GraphInput, Mode, SurrogateConfig, SurrogateParams};

/// `(μ − y_max) Φ(z) + σ φ(z)` with `z = (μ − y_max)/σ`, and its limit
/// `max(μ − y_max, 0)` at `σ = 0`.
pub fn expected_improvement<T: Real>(mu: T, sigma: T, y_max: T) -> T {
    let gap = mu - y_max;
    if sigma <= T::zero() {
        return gap.max(T::zero());
    }
    let z = gap / sigma;
    (gap * normal_cdf(z) + sigma * normal_pdf(z)).max(T::zero())
}

/// Predictive `(μ, σ²)` under each sample.
pub fn predictions<T: Real>(basis: &[T], samples: &HyperSampleSet<T>) -> Result<Vec<(T, T)>> {
    samples.samples.iter().map(|s| s.posterior.predict(basis)).collect()
}

/// `Σᵢ EI(φ | θ⁽ⁱ⁾)` for a precomputed basis vector.
pub fn integrated_ei_from_basis<T: Real>(basis: &[T], samples: &HyperSampleSet<T>, y_max: T) -> Result<T> {
    if samples.is_empty() {
        return Err(Error::Config("integrated EI needs at least one sample".into()));
    }
    let mut total = T::zero();
    for (mu, var) in predictions(basis, samples)? {
        total = total + expected_improvement(mu, var.max(T::zero()).sqrt(), y_max);
    }
    Ok(total)
}

/// Integrated EI of a graph: one forward pass for `φ(G)`, then the sum over samples.
pub fn integrated_ei<T: Real>(
    graph: &GraphInput<T>,
    params: &SurrogateParams<T>,
    config: &SurrogateConfig,
    samples: &HyperSampleSet<T>,
    y_max: T,
) -> Result<T> {
    let composed = ComposedWeights::new(params);
    let out = forward(graph, params, &composed, config, Mode::Predict)?;
    integrated_ei_from_basis(&out.basis, samples, y_max)
}

/// Source of basis vectors for the graphs of a pool, addressed by position.
pub trait BasisProvider<T: Real>: Sync {
    fn len(&self) -> usize;
    fn id(&self, index: usize) -> u64;
    fn basis(&self, index: usize) -> Result<Cow<'_, [T]>>;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Basis vectors computed ahead of time, one row per graph.
#[derive(Clone, Debug)]
pub struct CachedBasis<T> {
    pub ids: Vec<u64>,
    pub rows: Mat<T>,
}

impl<T: Real> BasisProvider<T> for CachedBasis<T> {
    fn len(&self) -> usize {
        self.ids.len()
    }

    fn id(&self, index: usize) -> u64 {
        self.ids[index]
    }

    fn basis(&self, index: usize) -> Result<Cow<'_, [T]>> {
        Ok(Cow::Borrowed(self.rows.row(index)))
    }
}

/// Basis vectors computed on demand by the network.
pub struct NetworkBasis<'a, T> {
    pub inputs: &'a [GraphInput<T>],
    pub params: &'a SurrogateParams<T>,
    pub composed: ComposedWeights<T>,
    pub config: &'a SurrogateConfig,
}

impl<'a, T: Real> NetworkBasis<'a, T> {
    pub fn new(inputs: &'a [GraphInput<T>], params: &'a SurrogateParams<T>, config: &'a SurrogateConfig) -> Self {
        Self {
            inputs,
            params,
            composed: ComposedWeights::new(params),
            config,
        }
    }

    /// Evaluates every graph once, in parallel.
    pub fn materialize(&self) -> Result<CachedBasis<T>> {
        let rows: Vec<Vec<T>> = (0..self.len())
            .into_par_iter()
            .map(|i| self.basis(i).map(Cow::into_owned))
            .collect::<Result<_>>()?;
        let m = self.config.basis_dim();
        let data = rows.into_iter().flatten().collect();
        Ok(CachedBasis {
            ids: self.inputs.iter().map(|g| g.id).collect(),
            rows: Mat::from_vec(self.inputs.len(), m, data)?,
        })
    }
}

impl<T: Real> BasisProvider<T> for NetworkBasis<'_, T> {
    fn len(&self) -> usize {
        self.inputs.len()
    }

    fn id(&self, index: usize) -> u64 {
        self.inputs[index].id
    }

    fn basis(&self, index: usize) -> Result<Cow<'_, [T]>> {
        let out = forward(&self.inputs[index], self.params, &self.composed, self.config, Mode::Predict)?;
        Ok(Cow::Owned(out.basis))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub id: u64,
    /// Position of the chosen graph in the provider.
    pub index: usize,
    pub acquisition: f64,
    /// Ids of every graph that was scored, in scoring order.
    pub scored: Vec<u64>,
}

/// Scores up to `budget` unevaluated graphs, drawn uniformly without
/// replacement, and returns the one with the highest integrated EI. Ties are
/// broken uniformly at random.
pub fn select_next<T: Real, P: BasisProvider<T> + ?Sized, R: Rng>(
    provider: &P,
    evaluated: &HashSet<u64>,
    samples: &HyperSampleSet<T>,
    y_max: T,
    budget: usize,
    rng: &mut R,
) -> Result<Selection> {
    let open: Vec<usize> = (0..provider.len())
        .filter(|&i| !evaluated.contains(&provider.id(i)))
        .collect();
    if open.is_empty() {
        return Err(Error::PoolExhausted);
    }
    if budget == 0 {
        return Err(Error::Config("candidate budget must be positive".into()));
    }
    let chosen: Vec<usize> = if budget >= open.len() {
        open
    } else {
        let mut picks = index::sample(rng, open.len(), budget).into_vec();
        picks.sort_unstable();
        picks.into_iter().map(|k| open[k]).collect()
    };
    let scores: Vec<T> = chosen
        .par_iter()
        .map(|&i| integrated_ei_from_basis(&provider.basis(i)?, samples, y_max))
        .collect::<Result<_>>()?;
    let best = scores
        .iter()
        .copied()
        .fold(T::neg_infinity(), |a, b| if b > a { b } else { a });
    let ties: Vec<usize> = (0..scores.len()).filter(|&k| scores[k] == best).collect();
    let pick = if ties.len() == 1 {
        ties[0]
    } else {
        ties[rng.gen_range(0..ties.len())]
    };
    let index = chosen[pick];
    Ok(Selection {
        id: provider.id(index),
        index,
        acquisition: best.as_f64(),
        scored: chosen.iter().map(|&i| provider.id(i)).collect(),
    })
}
