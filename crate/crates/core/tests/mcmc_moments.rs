use graphbo::blr::BlrHyper;
use graphbo::mcmc::{log_posterior, log_prior, sample_posterior, EnsembleConfig, EnsembleSampler, PriorSpec};
use graphbo::numerics::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Draws from an injected 2-d Gaussian with 20 walkers for `sweeps` sweeps
/// and returns the sample means and variances after burn-in.
fn gaussian_moments(mean: [f64; 2], sd: [f64; 2], sweeps: usize, seed: u64) -> ([f64; 2], [f64; 2]) {
    let target = move |x: &[f64]| -> f64 { (0..2).map(|i| -0.5 * ((x[i] - mean[i]) / sd[i]).powi(2)).sum() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, 0.1).unwrap();
    let init: Vec<Vec<f64>> = (0..20).map(|_| vec![jitter.sample(&mut rng), jitter.sample(&mut rng)]).collect();
    let config = EnsembleConfig::default();
    let mut sampler = EnsembleSampler::new(target, init, config, ChaCha8Rng::seed_from_u64(seed + 1)).unwrap();
    let burn = config.burn_in;
    let mut draws: Vec<[f64; 2]> = Vec::new();
    for s in 0..sweeps {
        sampler.sweep().unwrap();
        if s >= burn {
            draws.extend(sampler.state().positions.iter().map(|p| [p[0], p[1]]));
        }
    }
    let n = draws.len() as f64;
    let mut m = [0.0; 2];
    let mut v = [0.0; 2];
    for i in 0..2 {
        m[i] = draws.iter().map(|d| d[i]).sum::<f64>() / n;
        v[i] = draws.iter().map(|d| (d[i] - m[i]).powi(2)).sum::<f64>() / n;
    }
    (m, v)
}

#[test]
fn recovers_standard_gaussian_moments() {
    let (m, v) = gaussian_moments([0.0, 0.0], [1.0, 1.0], 2000, 3);
    for i in 0..2 {
        assert!(m[i].abs() < 0.05, "mean {m:?}");
        assert!((v[i] - 1.0).abs() < 0.1, "variance {v:?}");
    }
}

fn toy_data(seed: u64) -> (Mat<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = Mat::from_fn(12, 4, |_, j| if j == 3 { 1.0 } else { rng.gen_range(-1.0..1.0) });
    let y = (0..12).map(|i| phi[(i, 0)] - 0.5 * phi[(i, 1)] + 0.1 * rng.gen_range(-1.0..1.0)).collect();
    (phi, y)
}

#[test]
fn posterior_samples_are_positive_and_reproducible() {
    let (phi, y) = toy_data(1);
    let prior = PriorSpec::default();
    let config = EnsembleConfig::default();
    let a = sample_posterior(&phi, &y, 10, &prior, &config, ChaCha8Rng::seed_from_u64(4)).unwrap();
    let b = sample_posterior(&phi, &y, 10, &prior, &config, ChaCha8Rng::seed_from_u64(4)).unwrap();
    assert_eq!(a.len(), 10);
    for (s, t) in a.samples.iter().zip(&b.samples) {
        assert_eq!(s.hyper, t.hyper);
        assert!(s.hyper.weight_variance > 0.0 && s.hyper.noise_variance > 0.0);
        assert!(s.log_posterior.is_finite());
        let direct = log_posterior(s.hyper, &phi, &y, &prior).unwrap();
        assert!((direct - s.log_posterior).abs() < 1e-8 * direct.abs().max(1.0));
    }
    let one = sample_posterior(&phi, &y, 1, &prior, &config, ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(one.len(), 1);
    assert!(one.samples[0].log_posterior.is_finite());
}

#[test]
fn posterior_is_likelihood_plus_prior() {
    let (phi, y) = toy_data(2);
    let prior = PriorSpec::default();
    let h = BlrHyper::new(3.0, 0.2).unwrap();
    let lml = graphbo::blr::BlrPosterior::fit(&phi, &y, h).unwrap().log_marginal_likelihood();
    let lp = log_posterior(h, &phi, &y, &prior).unwrap();
    assert!((lp - (lml + log_prior(h, &prior))).abs() < 1e-12);
    let bad = BlrHyper {
        weight_variance: 1.0,
        noise_variance: -1.0,
    };
    assert_eq!(log_posterior(bad, &phi, &y, &prior).unwrap(), f64::NEG_INFINITY);
}

#[test]
fn flat_prior_ranks_by_evidence() {
    let (phi, y) = toy_data(3);
    let flat = PriorSpec::flat();
    let hypers: Vec<BlrHyper<f64>> = [(0.1, 0.01), (1.0, 0.05), (10.0, 0.5), (3.0, 2.0)]
        .iter()
        .map(|&(w, n)| BlrHyper::new(w, n).unwrap())
        .collect();
    let mut by_post: Vec<usize> = (0..4).collect();
    let mut by_lml = by_post.clone();
    let post: Vec<f64> = hypers.iter().map(|&h| log_posterior(h, &phi, &y, &flat).unwrap()).collect();
    let lml: Vec<f64> = hypers
        .iter()
        .map(|&h| graphbo::blr::BlrPosterior::fit(&phi, &y, h).unwrap().log_marginal_likelihood())
        .collect();
    by_post.sort_by(|&a, &b| post[a].total_cmp(&post[b]));
    by_lml.sort_by(|&a, &b| lml[a].total_cmp(&lml[b]));
    assert_eq!(by_post, by_lml);
}
