//! Row-compressed sparse matrix, used for node-feature inputs.

use serde::{Deserialize, Serialize};

use super::mat::Mat;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseRows<T> {
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> SparseRows<T> {
    pub fn from_dense_rows<R: AsRef<[T]>>(cols: usize, rows: &[R]) -> Self {
        let mut out = Self {
            cols,
            row_ptr: vec![0],
            col_idx: Vec::new(),
            values: Vec::new(),
        };
        for r in rows {
            for (j, &x) in r.as_ref().iter().enumerate() {
                if x != T::zero() {
                    out.col_idx.push(j);
                    out.values.push(x);
                }
            }
            out.row_ptr.push(out.col_idx.len());
        }
        out
    }

    pub fn from_dense(m: &Mat<T>) -> Self {
        let rows: Vec<&[T]> = (0..m.rows()).map(|i| m.row(i)).collect();
        Self::from_dense_rows(m.cols(), &rows)
    }

    /// `rows` copies of the same sparse row.
    pub fn repeated_row(rows: usize, cols: usize, entries: &[(usize, T)]) -> Self {
        let mut out = Self {
            cols,
            row_ptr: Vec::with_capacity(rows + 1),
            col_idx: Vec::with_capacity(rows * entries.len()),
            values: Vec::with_capacity(rows * entries.len()),
        };
        out.row_ptr.push(0);
        for _ in 0..rows {
            for &(j, v) in entries {
                debug_assert!(j < cols);
                out.col_idx.push(j);
                out.values.push(v);
            }
            out.row_ptr.push(out.col_idx.len());
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_entries(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn to_dense(&self) -> Mat<T> {
        let mut m = Mat::zeros(self.rows(), self.cols);
        for i in 0..self.rows() {
            for (j, v) in self.row_entries(i) {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn cast<U: Real>(&self) -> SparseRows<U> {
        SparseRows {
            cols: self.cols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: self.values.iter().map(|v| U::of(v.as_f64())).collect(),
        }
    }

    /// `self * rhs`
    pub fn mul_dense(&self, rhs: &Mat<T>) -> Mat<T> {
        debug_assert_eq!(self.cols, rhs.rows());
        let mut out = Mat::zeros(self.rows(), rhs.cols());
        for i in 0..self.rows() {
            for (k, v) in self.row_entries(i) {
                let src = rhs.row(k);
                for (o, &x) in out.row_mut(i).iter_mut().zip(src) {
                    *o = *o + v * x;
                }
            }
        }
        out
    }

    /// `out += selfᵀ * rhs`
    pub fn tr_mul_acc(&self, rhs: &Mat<T>, out: &mut Mat<T>) {
        debug_assert_eq!(self.rows(), rhs.rows());
        debug_assert_eq!(out.shape(), (self.cols, rhs.cols()));
        for i in 0..self.rows() {
            let src = rhs.row(i);
            for (k, v) in self.row_entries(i) {
                for (o, &x) in out.row_mut(k).iter_mut().zip(src) {
                    *o = *o + v * x;
                }
            }
        }
    }
}
