//! The optimization loop: random initialization, surrogate training,
//! hyperparameter sampling, and repeated select/evaluate/retrain.

mod record;

use std::collections::HashSet;
use std::time::Instant;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use record::{RunRecord, RunRow, CSV_HEADER};

use crate::acquisition::{select_next, CachedBasis, NetworkBasis};
use crate::blr::EvidenceCache;
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, GraphPool};
use crate::mcmc::{sample_posterior_cached, EnsembleConfig, HyperSampleSet, PriorSpec};
use crate::numerics::Mat;
use crate::surrogate::train::mix;
use crate::surrogate::{train, GraphInput, SurrogateConfig, SurrogateParams, TrainOptions};

/// The black-box function being maximized.
pub trait ObjectiveFunction: Sync {
    fn evaluate(&self, graph: &AttributedGraph) -> Result<f64>;

    /// Short label describing what an evaluation costs, for reports.
    fn cost_tag(&self) -> &str {
        "unit"
    }
}

impl<F: Fn(&AttributedGraph) -> Result<f64> + Sync> ObjectiveFunction for F {
    fn evaluate(&self, graph: &AttributedGraph) -> Result<f64> {
        self(graph)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedBundle {
    pub pool: u64,
    pub net: u64,
    pub mcmc: u64,
    pub select: u64,
}

impl SeedBundle {
    /// Derives all four seeds from one master seed.
    pub fn from_master(seed: u64) -> Self {
        Self {
            pool: mix(seed, 1),
            net: mix(seed, 2),
            mcmc: mix(seed, 3),
            select: mix(seed, 4),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Random evaluations before the first fit (`M`).
    pub init_evaluations: usize,
    pub max_iter: usize,
    /// Hyperparameter samples per iteration (`S`).
    pub num_samples: usize,
    /// Retraining period (`Re`).
    pub retrain_period: usize,
    /// Graphs scored per selection; `None` picks the default rule.
    pub candidate_budget: Option<usize>,
    pub initial_epochs: usize,
    pub retrain_epochs: usize,
    /// Continue from the current weights when retraining.
    pub warm_start: bool,
    /// Stop once the incumbent reaches this value.
    pub target_value: Option<f64>,
    pub seeds: SeedBundle,
    pub surrogate: SurrogateConfig,
    pub prior: PriorSpec,
    pub ensemble: EnsembleConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            init_evaluations: 20,
            max_iter: 480,
            num_samples: 10,
            retrain_period: 20,
            candidate_budget: None,
            initial_epochs: 2000,
            retrain_epochs: 500,
            warm_start: true,
            target_value: None,
            seeds: SeedBundle::default(),
            surrogate: SurrogateConfig::default(),
            prior: PriorSpec::default(),
            ensemble: EnsembleConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.init_evaluations < 2 {
            return Err(Error::Config("at least two initial evaluations are required".into()));
        }
        if self.retrain_period == 0 || self.num_samples == 0 {
            return Err(Error::Config("retrain period and sample count must be positive".into()));
        }
        if self.candidate_budget == Some(0) {
            return Err(Error::Config("candidate budget must be positive".into()));
        }
        self.prior.validate()?;
        self.ensemble.validate(2)
    }

    /// Whole pool up to 2048 graphs, otherwise 1024 random candidates.
    pub fn effective_budget(&self, pool_size: usize) -> usize {
        self.candidate_budget
            .unwrap_or(if pool_size <= 2048 { pool_size } else { 1024 })
    }

    /// The surrogate config with its input dimensions taken from `pool`.
    pub fn surrogate_for(&self, pool: &GraphPool) -> SurrogateConfig {
        SurrogateConfig {
            input_dim: pool.node_dim(),
            num_relations: pool.num_relations(),
            global_dim: pool.global_dim(),
            ..self.surrogate.clone()
        }
    }
}

/// Observations so far, in evaluation order.
#[derive(Clone, Debug, Default)]
pub struct EvaluationSet {
    /// `(pool index, graph id, y)`; `y` is `None` for failed evaluations.
    entries: Vec<(usize, u64, Option<f64>)>,
    ids: HashSet<u64>,
    best: Option<(u64, f64)>,
}

impl EvaluationSet {
    pub fn push(&mut self, index: usize, id: u64, y: Option<f64>) -> Result<()> {
        if !self.ids.insert(id) {
            return Err(Error::Config(format!("graph {id} evaluated twice")));
        }
        self.entries.push((index, id, y));
        if let Some(y) = y {
            if self.best.is_none_or(|(_, b)| y > b) {
                self.best = Some((id, y));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> &HashSet<u64> {
        &self.ids
    }

    pub fn best(&self) -> Option<(u64, f64)> {
        self.best
    }

    /// Successful observations as `(pool index, y)`.
    pub fn successes(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().filter_map(|&(i, _, y)| y.map(|y| (i, y)))
    }

    /// Mean and standard deviation of the successful targets; a zero spread
    /// is reported as 1.
    pub fn standardization(&self) -> (f64, f64) {
        let ys: Vec<f64> = self.successes().map(|(_, y)| y).collect();
        if ys.is_empty() {
            return (0.0, 1.0);
        }
        let n = ys.len() as f64;
        let mean = ys.iter().sum::<f64>() / n;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        (mean, if std > 1e-12 { std } else { 1.0 })
    }
}

struct Loop<'a, O: ?Sized> {
    objective: &'a O,
    pool: &'a GraphPool,
    config: &'a ExperimentConfig,
    net_config: SurrogateConfig,
    inputs: Vec<GraphInput<f64>>,
    params: SurrogateParams<f64>,
    basis: Option<CachedBasis<f64>>,
    data: EvaluationSet,
    record: RunRecord,
}

impl<'a, O: ObjectiveFunction + ?Sized> Loop<'a, O> {
    fn evaluate(&mut self, index: usize, select_ms: f64) -> Result<()> {
        let graph = self.pool.get(index);
        let start = Instant::now();
        let y = self.objective.evaluate(graph).ok().filter(|y| y.is_finite());
        let eval_ms = start.elapsed().as_secs_f64() * 1e3;
        self.data.push(index, graph.id, y)?;
        self.record.rows.push(RunRow {
            t: self.data.len(),
            graph_id: graph.id,
            y,
            best_y: self.data.best().map(|b| b.1),
            select_ms,
            eval_ms,
            retrain_ms: 0.0,
        });
        Ok(())
    }

    fn fit(&mut self, epochs: usize, round: u64) -> Result<()> {
        let (mean, std) = self.data.standardization();
        let batch: Vec<(&GraphInput<f64>, f64)> = self
            .data
            .successes()
            .map(|(i, y)| (&self.inputs[i], (y - mean) / std))
            .collect();
        if batch.is_empty() {
            return Err(Error::Config("no successful evaluations to train on".into()));
        }
        if round > 0 && !self.config.warm_start {
            self.params = SurrogateParams::init(&self.net_config, mix(self.config.seeds.net, round))?;
        }
        train(
            &batch,
            &mut self.params,
            &self.net_config,
            TrainOptions {
                epochs,
                seed: mix(self.config.seeds.net, round),
            },
        )?;
        self.basis = Some(NetworkBasis::new(&self.inputs, &self.params, &self.net_config).materialize()?);
        Ok(())
    }

    /// Hyperparameter samples for the current data, plus the standardized
    /// incumbent.
    fn sample(&self, iteration: u64) -> Result<(HyperSampleSet<f64>, f64)> {
        let basis = self.basis.as_ref().expect("surrogate fitted before sampling");
        let (mean, std) = self.data.standardization();
        let obs: Vec<(usize, f64)> = self.data.successes().collect();
        let m = basis.rows.cols();
        let phi = Mat::from_fn(obs.len(), m, |r, c| basis.rows[(obs[r].0, c)]);
        let y: Vec<f64> = obs.iter().map(|&(_, y)| (y - mean) / std).collect();
        let cache = EvidenceCache::new(&phi, &y)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seeds.mcmc);
        rng.set_stream(iteration);
        let samples = sample_posterior_cached(&cache, self.config.num_samples, &self.config.prior, &self.config.ensemble, rng)?;
        let y_max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((samples, y_max))
    }

    fn target_reached(&self) -> bool {
        match (self.config.target_value, self.data.best()) {
            (Some(target), Some((_, b))) => b >= target,
            _ => false,
        }
    }
}

/// Runs the optimization loop and returns its per-evaluation record.
pub fn run<O: ObjectiveFunction + ?Sized>(objective: &O, pool: &GraphPool, config: &ExperimentConfig) -> Result<RunRecord> {
    run_with_basis(objective, pool, config).map(|(record, _)| record)
}

/// As [`run`], also returning the pool's basis vectors under the final
/// network (absent when the loop never trained).
pub fn run_with_basis<O: ObjectiveFunction + ?Sized>(
    objective: &O,
    pool: &GraphPool,
    config: &ExperimentConfig,
) -> Result<(RunRecord, Option<CachedBasis<f64>>)> {
    config.validate()?;
    let m = config.init_evaluations;
    if pool.len() <= m {
        return Err(Error::Config(format!(
            "pool of {} graphs needs more than {m} (the initial evaluations)",
            pool.len()
        )));
    }
    let net_config = config.surrogate_for(pool);
    net_config.validate()?;
    let inputs = pool
        .graphs()
        .iter()
        .map(|g| GraphInput::new(g, pool.num_relations()))
        .collect::<Result<Vec<_>>>()?;
    let params = SurrogateParams::init(&net_config, config.seeds.net)?;
    let mut state = Loop {
        objective,
        pool,
        config,
        net_config,
        inputs,
        params,
        basis: None,
        data: EvaluationSet::default(),
        record: RunRecord::default(),
    };

    let mut select_rng = ChaCha8Rng::seed_from_u64(config.seeds.select);
    for index in index::sample(&mut select_rng, pool.len(), m).into_vec() {
        state.evaluate(index, 0.0)?;
    }
    let budget = config.effective_budget(pool.len());

    if config.max_iter > 0 && !state.target_reached() {
        state.fit(config.initial_epochs, 0)?;
        for t in 1..=config.max_iter {
            if state.data.len() == pool.len() {
                break;
            }
            let start = Instant::now();
            let (samples, y_max) = state.sample(t as u64)?;
            let basis = state.basis.as_ref().expect("fitted");
            let choice = select_next(basis, state.data.ids(), &samples, y_max, budget, &mut select_rng)?;
            let select_ms = start.elapsed().as_secs_f64() * 1e3;
            state.evaluate(choice.index, select_ms)?;
            if state.target_reached() {
                break;
            }
            if t % config.retrain_period == 0 {
                let start = Instant::now();
                state.fit(config.retrain_epochs, t as u64)?;
                state.record.rows.last_mut().expect("row just pushed").retrain_ms = start.elapsed().as_secs_f64() * 1e3;
            }
        }
    }

    let mut record = state.record;
    if let Some((id, y)) = state.data.best() {
        record.best_id = Some(id);
        record.best_y = Some(y);
    }
    Ok((record, state.basis))
}

/// Uniform sampling without replacement, recorded in the same schema.
pub fn random_baseline<O: ObjectiveFunction + ?Sized>(
    objective: &O,
    pool: &GraphPool,
    budget: usize,
    seed: u64,
) -> Result<RunRecord> {
    if budget > pool.len() {
        return Err(Error::Config(format!(
            "budget {budget} exceeds the pool size {}",
            pool.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = EvaluationSet::default();
    let mut record = RunRecord::default();
    for index in index::sample(&mut rng, pool.len(), budget).into_vec() {
        let graph = pool.get(index);
        let start = Instant::now();
        let y = objective.evaluate(graph).ok().filter(|y| y.is_finite());
        let eval_ms = start.elapsed().as_secs_f64() * 1e3;
        data.push(index, graph.id, y)?;
        record.rows.push(RunRow {
            t: data.len(),
            graph_id: graph.id,
            y,
            best_y: data.best().map(|b| b.1),
            select_ms: 0.0,
            eval_ms,
            retrain_ms: 0.0,
        });
    }
    if let Some((id, y)) = data.best() {
        record.best_id = Some(id);
        record.best_y = Some(y);
    }
    Ok(record)
}
