use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::mat::Mat;
use crate::error::Error;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply_scalar<T: Real>(self, x: T) -> T {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(T::zero()),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the pre-activation `x` and the output `y = f(x)`.
    #[inline]
    pub fn derivative_scalar<T: Real>(self, x: T, y: T) -> T {
        match self {
            Activation::Identity => T::one(),
            Activation::Relu => {
                if x > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Tanh => T::one() - y * y,
        }
    }

    pub fn apply<T: Real>(self, x: &Mat<T>) -> Mat<T> {
        match self {
            Activation::Identity => x.clone(),
            _ => x.map(|v| self.apply_scalar(v)),
        }
    }

    pub fn derivative<T: Real>(self, x: &Mat<T>) -> Mat<T> {
        x.map(|v| self.derivative_scalar(v, self.apply_scalar(v)))
    }

    /// `grad_out ⊙ f'(pre)` given cached `pre` and `post`.
    pub fn backprop<T: Real>(self, pre: &Mat<T>, post: &Mat<T>, grad_out: &Mat<T>) -> Mat<T> {
        if self == Activation::Identity {
            return grad_out.clone();
        }
        let mut g = grad_out.clone();
        for ((gv, &x), &y) in g
            .as_mut_slice()
            .iter_mut()
            .zip(pre.as_slice())
            .zip(post.as_slice())
        {
            *gv = *gv * self.derivative_scalar(x, y);
        }
        g
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Identity => "identity",
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        })
    }
}

impl FromStr for Activation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "identity" | "linear" => Ok(Activation::Identity),
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::Config(format!("unknown activation `{other}`"))),
        }
    }
}

/// Softmax of every row, shifted by the row maximum.
pub fn row_softmax<T: Real>(x: &Mat<T>) -> Mat<T> {
    let mut out = x.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let mut total = T::zero();
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            total = total + *v;
        }
        for v in row.iter_mut() {
            *v = *v / total;
        }
    }
    out
}

/// Backward pass of [`row_softmax`]: `dX = S ⊙ (dS − rowsum(dS ⊙ S))`.
pub fn row_softmax_backward<T: Real>(softmax: &Mat<T>, grad_out: &Mat<T>) -> Mat<T> {
    let mut g = Mat::zeros(softmax.rows(), softmax.cols());
    for i in 0..softmax.rows() {
        let s = softmax.row(i);
        let d = grad_out.row(i);
        let inner: T = s.iter().zip(d).map(|(&a, &b)| a * b).sum();
        for ((o, &a), &b) in g.row_mut(i).iter_mut().zip(s).zip(d) {
            *o = a * (b - inner);
        }
    }
    g
}
