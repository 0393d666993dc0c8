use std::io::{self, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{generate_pool, situation_objective, Situation, SyntheticSpec};
use crate::blr::{BlrHyper, DenseGp};
use crate::bo::{run_with_basis, ExperimentConfig};
use crate::error::{Error, Result};
use crate::numerics::Mat;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    /// Observation counts `N` at which the loop is timed.
    pub sizes: Vec<usize>,
    /// Candidate pool, shared by every size.
    pub pool: SyntheticSpec,
    /// Timed iterations per size; one retraining happens at the last one
    /// when this equals the retraining period.
    pub iterations: usize,
    /// Epochs for the untimed fit on the first `N` observations.
    pub warmup_epochs: usize,
    pub experiment: ExperimentConfig,
    /// Evidence evaluations per timed dense-GP iteration.
    pub gp_fits: usize,
    /// Candidates scored per timed dense-GP iteration.
    pub gp_candidates: usize,
    pub gp_repeats: usize,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        let experiment = ExperimentConfig::default();
        Self {
            sizes: vec![100, 200, 400, 800],
            pool: SyntheticSpec {
                pool_size: 1000,
                ..SyntheticSpec::default()
            },
            iterations: experiment.retrain_period,
            warmup_epochs: 20,
            experiment,
            gp_fits: 20,
            gp_candidates: 200,
            gp_repeats: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub n: usize,
    pub iteration: usize,
    pub select_ms: f64,
    pub retrain_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// `(N, mean selection + retraining ms per iteration)`.
    pub per_iteration: Vec<(usize, f64)>,
    /// `(N, median selection ms)`.
    pub median_select: Vec<(usize, f64)>,
    pub slope: f64,
    /// `(N, ms per dense-GP iteration)`.
    pub gp: Vec<(usize, f64)>,
    pub gp_slope: f64,
}

impl ScalingReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "n,iteration,t_select_ms,t_retrain_ms")?;
        for r in &self.rows {
            writeln!(out, "{},{},{:.3},{:.3}", r.n, r.iteration, r.select_ms, r.retrain_ms)?;
        }
        Ok(())
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Milliseconds for one dense-GP iteration on `phi`: `fits` evidence
/// evaluations over a noise grid, then mean and variance at each candidate
/// under the best of them. Reports the fastest of `repeats` timings.
pub fn gp_reference_time(phi: &Mat<f64>, y: &[f64], candidates: &Mat<f64>, fits: usize, repeats: usize) -> Result<f64> {
    if fits == 0 || repeats == 0 {
        return Err(Error::Config("dense-GP reference needs at least one fit and one repeat".into()));
    }
    let mut best_ms = f64::INFINITY;
    for _ in 0..repeats {
        let start = Instant::now();
        let mut best: Option<(f64, DenseGp<f64>)> = None;
        for k in 0..fits {
            let noise = 10f64.powf(-3.0 + 3.0 * k as f64 / fits as f64);
            let gp = DenseGp::fit(phi, y, BlrHyper::new(10f64.exp(), noise)?)?;
            let lml = gp.log_marginal_likelihood();
            if best.as_ref().is_none_or(|b| lml > b.0) {
                best = Some((lml, gp));
            }
        }
        let gp = best.expect("at least one fit").1;
        let mut checksum = 0.0;
        for i in 0..candidates.rows() {
            let (m, v) = gp.predict(candidates.row(i))?;
            checksum += m + v;
        }
        std::hint::black_box(checksum);
        best_ms = best_ms.min(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(best_ms)
}

/// Times the loop at each observation count and the dense-GP reference on
/// the same basis vectors.
pub fn scaling_harness(config: &ScalingConfig) -> Result<ScalingReport> {
    let mut sizes = config.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.is_empty() || config.iterations == 0 {
        return Err(Error::Config("scaling needs at least one size and one iteration".into()));
    }
    let largest = *sizes.last().expect("non-empty");
    if config.pool.pool_size <= largest + config.iterations {
        return Err(Error::Config(format!(
            "pool of {} graphs is too small for N = {largest} plus {} iterations",
            config.pool.pool_size, config.iterations
        )));
    }
    let generated = generate_pool(&config.pool)?;
    let (pool, objective) = situation_objective(&generated.pool, Situation::A)?;

    let mut rows = Vec::new();
    let mut per_iteration = Vec::new();
    let mut median_select = Vec::new();
    let mut gp = Vec::new();
    for &n in &sizes {
        let experiment = ExperimentConfig {
            init_evaluations: n,
            max_iter: config.iterations,
            retrain_period: config.iterations,
            initial_epochs: config.warmup_epochs,
            target_value: None,
            ..config.experiment.clone()
        };
        let (record, basis) = run_with_basis(&objective, &pool, &experiment)?;
        let timed: Vec<ScalingRow> = record.rows[n..]
            .iter()
            .map(|r| ScalingRow {
                n,
                iteration: r.t - n,
                select_ms: r.select_ms,
                retrain_ms: r.retrain_ms,
            })
            .collect();
        let total: f64 = timed.iter().map(|r| r.select_ms + r.retrain_ms).sum();
        per_iteration.push((n, total / timed.len() as f64));
        median_select.push((n, median(timed.iter().map(|r| r.select_ms).collect())));
        rows.extend(timed);

        let basis = basis.ok_or_else(|| Error::Config("loop finished before training".into()))?;
        let position: std::collections::HashMap<u64, usize> =
            basis.ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let observed: Vec<(usize, f64)> = record.rows[..n]
            .iter()
            .filter_map(|r| r.y.map(|y| (position[&r.graph_id], y)))
            .collect();
        let m = basis.rows.cols();
        let phi = Mat::from_fn(observed.len(), m, |i, j| basis.rows[(observed[i].0, j)]);
        let y: Vec<f64> = observed.iter().map(|o| o.1).collect();
        let taken: std::collections::HashSet<u64> = record.rows.iter().map(|r| r.graph_id).collect();
        let open: Vec<usize> = (0..basis.ids.len())
            .filter(|&i| !taken.contains(&basis.ids[i]))
            .take(config.gp_candidates)
            .collect();
        let candidates = Mat::from_fn(open.len(), m, |i, j| basis.rows[(open[i], j)]);
        gp.push((n, gp_reference_time(&phi, &y, &candidates, config.gp_fits, config.gp_repeats)?));
        log::info!("scaling N={n}: {:.1} ms/iteration, GP {:.1} ms", per_iteration.last().unwrap().1, gp.last().unwrap().1);
    }
    let to_f = |v: &[(usize, f64)]| v.iter().map(|&(n, t)| (n as f64, t)).collect::<Vec<_>>();
    Ok(ScalingReport {
        rows,
        slope: log_log_slope(&to_f(&per_iteration)),
        gp_slope: log_log_slope(&to_f(&gp)),
        per_iteration,
        median_select,
        gp,
    })
}
