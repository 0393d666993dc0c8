//! Bayesian linear regression on fixed basis features.
//!
//! Observations are stored as an `N × M` design matrix whose rows are the
//! basis vectors `φ(G_i)`. With `K = σn⁻² ΦᵀΦ + σw⁻² I` (an `M × M` matrix)
//! the predictive distribution at `φ*` is
//!
//! ```text
//! μ  = σn⁻² φ*ᵀ K⁻¹ Φᵀ y
//! σ² = φ*ᵀ K⁻¹ φ* + σn²
//! ```
//!
//! so fitting costs `O(M²N + M³)` and each prediction `O(M²)`.

use crate::error::{Error, Result};
use crate::numerics::{dot, Cholesky, Mat, SymmetricEigen};
use crate::scalar::Real;

const FACTOR_HINT: &str = "try a larger noise variance";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlrHyper<T> {
    /// Prior variance `σw²` of the weights.
    pub weight_variance: T,
    /// Observation noise variance `σn²`.
    pub noise_variance: T,
}

impl<T: Real> BlrHyper<T> {
    pub fn new(weight_variance: T, noise_variance: T) -> Result<Self> {
        let ok = |v: T| v.is_finite() && v > T::zero();
        if !ok(weight_variance) || !ok(noise_variance) {
            return Err(Error::Config(format!(
                "BLR variances must be positive and finite, got ({weight_variance}, {noise_variance})"
            )));
        }
        Ok(Self {
            weight_variance,
            noise_variance,
        })
    }
}

fn check_design<T: Real>(phi: &Mat<T>, y: &[T]) -> Result<()> {
    if phi.rows() == 0 {
        return Err(Error::Config("BLR needs at least one observation".into()));
    }
    if phi.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "BLR targets".into(),
            expected: phi.rows(),
            found: y.len(),
        });
    }
    if !phi.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("BLR design matrix or targets".into()));
    }
    Ok(())
}

/// `ΦᵀΦ` for an `N × M` design matrix.
pub fn gram<T: Real>(phi: &Mat<T>) -> Mat<T> {
    let m = phi.cols();
    let mut g = Mat::zeros(m, m);
    for i in 0..phi.rows() {
        let row = phi.row(i);
        for a in 0..m {
            let ra = row[a];
            if ra == T::zero() {
                continue;
            }
            for (gb, &rb) in g.row_mut(a)[a..].iter_mut().zip(&row[a..]) {
                *gb = *gb + ra * rb;
            }
        }
    }
    for a in 0..m {
        for b in 0..a {
            g[(a, b)] = g[(b, a)];
        }
    }
    g
}

/// `Φᵀ y`.
pub fn project_targets<T: Real>(phi: &Mat<T>, y: &[T]) -> Vec<T> {
    let mut b = vec![T::zero(); phi.cols()];
    for (i, &yi) in y.iter().enumerate() {
        for (bj, &p) in b.iter_mut().zip(phi.row(i)) {
            *bj = *bj + p * yi;
        }
    }
    b
}

#[derive(Clone, Debug)]
pub struct BlrPosterior<T> {
    hyper: BlrHyper<T>,
    k: Mat<T>,
    chol: Cholesky<T>,
    /// `K⁻¹ Φᵀ y`
    k_inv_phi_y: Vec<T>,
    phi_y: Vec<T>,
    y_sq: T,
    num_obs: usize,
}

impl<T: Real> BlrPosterior<T> {
    pub fn fit(phi: &Mat<T>, y: &[T], hyper: BlrHyper<T>) -> Result<Self> {
        check_design(phi, y)?;
        Self::from_sufficient(&gram(phi), &project_targets(phi, y), dot(y, y), y.len(), hyper)
    }

    /// Fits from `ΦᵀΦ`, `Φᵀy`, `yᵀy` and `N`, which is all the posterior depends on.
    pub fn from_sufficient(gram: &Mat<T>, phi_y: &[T], y_sq: T, num_obs: usize, hyper: BlrHyper<T>) -> Result<Self> {
        let m = gram.rows();
        let inv_noise = T::one() / hyper.noise_variance;
        let inv_weight = T::one() / hyper.weight_variance;
        let mut k = gram.scale(inv_noise);
        for i in 0..m {
            k[(i, i)] = k[(i, i)] + inv_weight;
        }
        let chol = Cholesky::factor_with_jitter(&k).map_err(|e| match e {
            Error::NotPositiveDefinite { minor, .. } => Error::NotPositiveDefinite {
                minor,
                hint: FACTOR_HINT,
            },
            other => other,
        })?;
        let k_inv_phi_y = chol.solve_vec(phi_y);
        Ok(Self {
            hyper,
            k,
            chol,
            k_inv_phi_y,
            phi_y: phi_y.to_vec(),
            y_sq,
            num_obs,
        })
    }

    pub fn hyper(&self) -> BlrHyper<T> {
        self.hyper
    }

    pub fn precision(&self) -> &Mat<T> {
        &self.k
    }

    pub fn k_inv_phi_y(&self) -> &[T] {
        &self.k_inv_phi_y
    }

    pub fn num_features(&self) -> usize {
        self.k.rows()
    }

    /// Predictive mean and variance at one basis vector.
    pub fn predict(&self, phi_star: &[T]) -> Result<(T, T)> {
        if phi_star.len() != self.num_features() {
            return Err(Error::DimensionMismatch {
                context: "BLR query".into(),
                expected: self.num_features(),
                found: phi_star.len(),
            });
        }
        let mean = dot(phi_star, &self.k_inv_phi_y) / self.hyper.noise_variance;
        let var = self.chol.quad_form_inv(phi_star) + self.hyper.noise_variance;
        Ok((mean, var))
    }

    /// `ln p(y | Φ, θ)` evaluated through the `M × M` system.
    pub fn log_marginal_likelihood(&self) -> T {
        let s2 = self.hyper.noise_variance;
        let quad = dot(&self.phi_y, &self.k_inv_phi_y);
        let m = T::of(self.num_features() as f64);
        let n = T::of(self.num_obs as f64);
        let two_pi = T::of(2.0) * T::PI();
        T::of(-0.5)
            * (self.y_sq / s2 - quad / (s2 * s2)
                + self.chol.logdet()
                + m * self.hyper.weight_variance.ln()
                + n * (two_pi * s2).ln())
    }
}

/// Evidence at many hyperparameter values for one fixed data set.
///
/// Eigen-decomposes `ΦᵀΦ = Q Λ Qᵀ` once. Every `K` then shares the
/// eigenvectors `Q` with eigenvalues `λᵢ/σn² + 1/σw²`, so each evaluation
/// is `O(M)`.
#[derive(Clone, Debug)]
pub struct EvidenceCache<T> {
    eigenvalues: Vec<T>,
    /// `(Qᵀ Φᵀ y)²` per component.
    projected_sq: Vec<T>,
    y_sq: T,
    num_obs: usize,
    gram: Mat<T>,
    phi_y: Vec<T>,
}

impl<T: Real> EvidenceCache<T> {
    pub fn new(phi: &Mat<T>, y: &[T]) -> Result<Self> {
        check_design(phi, y)?;
        let gram = gram(phi);
        let phi_y = project_targets(phi, y);
        let eig = SymmetricEigen::new(&gram);
        let m = gram.rows();
        let projected_sq = (0..m)
            .map(|j| {
                let q = (0..m).map(|i| eig.vectors[(i, j)] * phi_y[i]).sum::<T>();
                q * q
            })
            .collect();
        let eigenvalues = eig.values.iter().map(|&l| l.max(T::zero())).collect();
        Ok(Self {
            eigenvalues,
            projected_sq,
            y_sq: dot(y, y),
            num_obs: y.len(),
            gram,
            phi_y,
        })
    }

    pub fn num_obs(&self) -> usize {
        self.num_obs
    }

    pub fn log_marginal_likelihood(&self, hyper: BlrHyper<T>) -> T {
        let s2 = hyper.noise_variance;
        let inv_noise = T::one() / s2;
        let inv_weight = T::one() / hyper.weight_variance;
        let mut logdet = T::zero();
        let mut quad = T::zero();
        for (&l, &p) in self.eigenvalues.iter().zip(&self.projected_sq) {
            let k = l * inv_noise + inv_weight;
            logdet = logdet + k.ln();
            quad = quad + p / k;
        }
        let m = T::of(self.eigenvalues.len() as f64);
        let n = T::of(self.num_obs as f64);
        let two_pi = T::of(2.0) * T::PI();
        T::of(-0.5)
            * (self.y_sq * inv_noise - quad * inv_noise * inv_noise
                + logdet
                + m * hyper.weight_variance.ln()
                + n * (two_pi * s2).ln())
    }

    /// Full posterior at `hyper` from the cached sufficient statistics.
    pub fn posterior(&self, hyper: BlrHyper<T>) -> Result<BlrPosterior<T>> {
        BlrPosterior::from_sufficient(&self.gram, &self.phi_y, self.y_sq, self.num_obs, hyper)
    }
}

/// Function-space view of the same model: a Gaussian process with kernel
/// `σw² φᵀφ' + σn² δ`, solved with the `N × N` covariance.
#[derive(Clone, Debug)]
pub struct DenseGp<T> {
    hyper: BlrHyper<T>,
    phi: Mat<T>,
    chol: Cholesky<T>,
    alpha: Vec<T>,
    y: Vec<T>,
}

impl<T: Real> DenseGp<T> {
    pub fn fit(phi: &Mat<T>, y: &[T], hyper: BlrHyper<T>) -> Result<Self> {
        check_design(phi, y)?;
        let n = phi.rows();
        let mut cov = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let k = hyper.weight_variance * dot(phi.row(i), phi.row(j));
                cov[(i, j)] = k;
                cov[(j, i)] = k;
            }
            cov[(i, i)] = cov[(i, i)] + hyper.noise_variance;
        }
        let chol = Cholesky::factor_with_jitter(&cov)?;
        let alpha = chol.solve_vec(y);
        Ok(Self {
            hyper,
            phi: phi.clone(),
            chol,
            alpha,
            y: y.to_vec(),
        })
    }

    pub fn predict(&self, phi_star: &[T]) -> Result<(T, T)> {
        if phi_star.len() != self.phi.cols() {
            return Err(Error::DimensionMismatch {
                context: "GP query".into(),
                expected: self.phi.cols(),
                found: phi_star.len(),
            });
        }
        let k: Vec<T> = (0..self.phi.rows())
            .map(|i| self.hyper.weight_variance * dot(self.phi.row(i), phi_star))
            .collect();
        let mean = dot(&k, &self.alpha);
        let prior = self.hyper.weight_variance * dot(phi_star, phi_star) + self.hyper.noise_variance;
        Ok((mean, prior - self.chol.quad_form_inv(&k)))
    }

    /// `ln N(y; 0, σw² ΦΦᵀ + σn² I)`.
    pub fn log_marginal_likelihood(&self) -> T {
        let n = T::of(self.y.len() as f64);
        T::of(-0.5) * (dot(&self.y, &self.alpha) + self.chol.logdet() + n * (T::of(2.0) * T::PI()).ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyper(w: f64, n: f64) -> BlrHyper<f64> {
        BlrHyper::new(w, n).unwrap()
    }

    #[test]
    fn single_zero_observation() {
        let post = BlrPosterior::fit(&Mat::from_rows(&[[1.0]]), &[0.0], hyper(1.0, 1.0)).unwrap();
        assert_eq!(post.precision(), &Mat::from_rows(&[[2.0]]));
        assert_eq!(post.k_inv_phi_y(), &[0.0]);
        let expected = -0.5 * (4.0 * std::f64::consts::PI).ln();
        assert!((post.log_marginal_likelihood() - expected).abs() < 1e-14);
    }

    #[test]
    fn two_unit_observations() {
        let post = BlrPosterior::fit(&Mat::from_rows(&[[1.0], [1.0]]), &[1.0, 1.0], hyper(1.0, 1.0)).unwrap();
        assert_eq!(post.precision(), &Mat::from_rows(&[[3.0]]));
        let (mu, var) = post.predict(&[1.0]).unwrap();
        assert!((mu - 2.0 / 3.0).abs() < 1e-15);
        assert!((var - (1.0 / 3.0 + 1.0)).abs() < 1e-15);
        let (mu0, var0) = post.predict(&[0.0]).unwrap();
        assert_eq!((mu0, var0), (0.0, 1.0));
    }

    #[test]
    fn rejects_bad_hyper_and_shapes() {
        assert!(BlrHyper::new(0.0, 1.0).is_err());
        assert!(BlrHyper::new(1.0, f64::NAN).is_err());
        let phi = Mat::from_rows(&[[1.0, 2.0]]);
        assert!(BlrPosterior::fit(&phi, &[1.0, 2.0], hyper(1.0, 1.0)).is_err());
        let post = BlrPosterior::fit(&phi, &[1.0], hyper(1.0, 1.0)).unwrap();
        assert!(post.predict(&[1.0]).is_err());
    }

    #[test]
    fn evidence_cache_matches_cholesky() {
        let phi = Mat::from_fn(7, 3, |i, j| ((i * 3 + j) as f64 * 0.37).sin());
        let y: Vec<f64> = (0..7).map(|i| (i as f64 * 0.9).cos()).collect();
        let cache = EvidenceCache::new(&phi, &y).unwrap();
        for &(w, n) in &[(1.0, 1.0), (0.3, 0.05), (22026.0, 0.01), (1e-3, 3.0)] {
            let h = hyper(w, n);
            let direct = BlrPosterior::fit(&phi, &y, h).unwrap().log_marginal_likelihood();
            assert!((cache.log_marginal_likelihood(h) - direct).abs() < 1e-9 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn dense_gp_agrees() {
        let phi = Mat::from_fn(6, 3, |i, j| ((i + 2 * j) as f64 * 0.61).cos());
        let y: Vec<f64> = (0..6).map(|i| (i as f64 * 0.4).sin()).collect();
        let h = hyper(0.7, 0.2);
        let blr = BlrPosterior::fit(&phi, &y, h).unwrap();
        let gp = DenseGp::fit(&phi, &y, h).unwrap();
        let (m1, v1) = blr.predict(&[0.3, -0.2, 0.9]).unwrap();
        let (m2, v2) = gp.predict(&[0.3, -0.2, 0.9]).unwrap();
        assert!((m1 - m2).abs() < 1e-10 && (v1 - v2).abs() < 1e-10);
        assert!((blr.log_marginal_likelihood() - gp.log_marginal_likelihood()).abs() < 1e-10);
    }
}
