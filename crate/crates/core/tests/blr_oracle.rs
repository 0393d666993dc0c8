use graphbo::blr::{BlrHyper, BlrPosterior, DenseGp, EvidenceCache};
use graphbo::numerics::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(rng: &mut ChaCha8Rng) -> (Mat<f64>, Vec<f64>, BlrHyper<f64>) {
    let n = rng.gen_range(1..=10);
    let m = rng.gen_range(1..=5);
    let phi = Mat::from_fn(n, m, |_, _| rng.gen_range(-1.5..1.5));
    let y = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let hyper = BlrHyper::new(10f64.powf(rng.gen_range(-1.0..1.0)), 10f64.powf(rng.gen_range(-2.0..0.5))).unwrap();
    (phi, y, hyper)
}

#[test]
fn weight_space_matches_function_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let (phi, y, hyper) = instance(&mut rng);
        let blr = BlrPosterior::fit(&phi, &y, hyper).unwrap();
        let gp = DenseGp::fit(&phi, &y, hyper).unwrap();
        for _ in 0..5 {
            let q: Vec<f64> = (0..phi.cols()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let (m1, v1) = blr.predict(&q).unwrap();
            let (m2, v2) = gp.predict(&q).unwrap();
            assert!((m1 - m2).abs() < 1e-8, "mean {m1} vs {m2}");
            assert!((v1 - v2).abs() < 1e-8, "variance {v1} vs {v2}");
        }
        let e1 = blr.log_marginal_likelihood();
        assert!((e1 - gp.log_marginal_likelihood()).abs() < 1e-9);
        let e3 = EvidenceCache::new(&phi, &y).unwrap().log_marginal_likelihood(hyper);
        assert!((e1 - e3).abs() < 1e-9);
    }
}

#[test]
fn precision_is_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let phi = Mat::from_fn(8, 4, |_, _| rng.gen_range(-1.0..1.0));
    let y: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let post = BlrPosterior::fit(&phi, &y, BlrHyper::new(0.5, 0.1).unwrap()).unwrap();
    let k = post.precision();
    assert!(k.max_abs_diff(&k.transpose()) <= 1e-14);
}

#[test]
fn zero_targets_maximize_the_evidence() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let phi = Mat::from_fn(6, 3, |_, _| rng.gen_range(-1.0..1.0));
    let hyper = BlrHyper::new(1.0, 0.3).unwrap();
    let zero = BlrPosterior::fit(&phi, &[0.0; 6], hyper).unwrap().log_marginal_likelihood();
    for _ in 0..10 {
        let y: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert!(BlrPosterior::fit(&phi, &y, hyper).unwrap().log_marginal_likelihood() < zero);
    }
}
