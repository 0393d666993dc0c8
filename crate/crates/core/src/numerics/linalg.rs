//! Cholesky factorization and symmetric eigen-decomposition.

use super::mat::{dot, Mat};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lower-triangular factor `L` with `K = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    lower: Mat<T>,
}

impl<T: Real> Cholesky<T> {
    pub fn factor(k: &Mat<T>) -> Result<Self> {
        let n = k.rows();
        if k.cols() != n {
            return Err(Error::Shape {
                op: "cholesky",
                lhs: k.shape(),
                rhs: k.shape(),
            });
        }
        let mut l = Mat::zeros(n, n);
        for j in 0..n {
            let row_j = l.row(j)[..j].to_vec();
            let d = k[(j, j)] - dot(&row_j, &row_j);
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    minor: j + 1,
                    hint: "",
                });
            }
            let ljj = d.sqrt();
            l[(j, j)] = ljj;
            for i in j + 1..n {
                let s = k[(i, j)] - dot(&l.row(i)[..j], &row_j);
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Self { lower: l })
    }

    /// Retries with a diagonal jitter of `1e-10·mean(diag)`, growing tenfold,
    /// up to three times.
    pub fn factor_with_jitter(k: &Mat<T>) -> Result<Self> {
        match Self::factor(k) {
            Ok(c) => Ok(c),
            Err(first) => {
                let n = k.rows();
                let mean_diag = (0..n).map(|i| k[(i, i)]).sum::<T>() / T::of(n.max(1) as f64);
                let mut jitter = T::of(1e-10) * mean_diag.abs();
                for _ in 0..3 {
                    let mut kj = k.clone();
                    for i in 0..n {
                        kj[(i, i)] = kj[(i, i)] + jitter;
                    }
                    if let Ok(c) = Self::factor(&kj) {
                        return Ok(c);
                    }
                    jitter = jitter * T::of(10.0);
                }
                Err(first)
            }
        }
    }

    pub fn lower(&self) -> &Mat<T> {
        &self.lower
    }

    pub fn dim(&self) -> usize {
        self.lower.rows()
    }

    /// Solves `L z = b` in place.
    pub fn forward_substitute(&self, b: &mut [T]) {
        let l = &self.lower;
        for i in 0..b.len() {
            let s = b[i] - dot(&l.row(i)[..i], &b[..i]);
            b[i] = s / l[(i, i)];
        }
    }

    /// Solves `Lᵀ x = z` in place.
    pub fn back_substitute(&self, z: &mut [T]) {
        let l = &self.lower;
        let n = z.len();
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in i + 1..n {
                s = s - l[(k, i)] * z[k];
            }
            z[i] = s / l[(i, i)];
        }
    }

    pub fn solve_vec(&self, b: &[T]) -> Vec<T> {
        let mut x = b.to_vec();
        self.forward_substitute(&mut x);
        self.back_substitute(&mut x);
        x
    }

    pub fn solve(&self, b: &Mat<T>) -> Mat<T> {
        let mut out = Mat::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let x = self.solve_vec(&b.column(j));
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    /// `bᵀ K⁻¹ b` via one forward substitution.
    pub fn quad_form_inv(&self, b: &[T]) -> T {
        let mut z = b.to_vec();
        self.forward_substitute(&mut z);
        dot(&z, &z)
    }

    pub fn logdet(&self) -> T {
        let two = T::of(2.0);
        (0..self.dim()).map(|i| two * self.lower[(i, i)].ln()).sum()
    }
}

pub fn solve_spd<T: Real>(k: &Mat<T>, b: &Mat<T>) -> Result<Mat<T>> {
    if b.rows() != k.rows() {
        return Err(Error::Shape {
            op: "solve_spd",
            lhs: k.shape(),
            rhs: b.shape(),
        });
    }
    Ok(Cholesky::factor(k)?.solve(b))
}

pub fn logdet_spd<T: Real>(k: &Mat<T>) -> Result<T> {
    Ok(Cholesky::factor(k)?.logdet())
}

/// Eigenvalues and column eigenvectors of a symmetric matrix (cyclic Jacobi).
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Mat<T>,
}

impl<T: Real> SymmetricEigen<T> {
    pub fn new(a: &Mat<T>) -> Self {
        let n = a.rows();
        debug_assert_eq!(n, a.cols());
        let mut m = a.clone();
        let mut v = Mat::identity(n);
        let eps = T::epsilon();
        for _sweep in 0..100 {
            let mut off = T::zero();
            let mut diag = T::zero();
            for i in 0..n {
                diag = diag + m[(i, i)] * m[(i, i)];
                for j in i + 1..n {
                    off = off + m[(i, j)] * m[(i, j)];
                }
            }
            if off <= eps * eps * diag || off == T::zero() {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = m[(p, q)];
                    if apq == T::zero() {
                        continue;
                    }
                    let theta = (m[(q, q)] - m[(p, p)]) / (T::of(2.0) * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let mkp = m[(k, p)];
                        let mkq = m[(k, q)];
                        m[(k, p)] = c * mkp - s * mkq;
                        m[(k, q)] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let mpk = m[(p, k)];
                        let mqk = m[(q, k)];
                        m[(p, k)] = c * mpk - s * mqk;
                        m[(q, k)] = s * mpk + c * mqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
        Self {
            values: (0..n).map(|i| m[(i, i)]).collect(),
            vectors: v,
        }
    }
}
