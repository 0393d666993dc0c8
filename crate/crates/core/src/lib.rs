//! Bayesian optimization over a finite pool of attributed graphs, driven by
//! a graph-convolutional surrogate with a Bayesian linear-regression head.
//!
//! The numerical core is generic over [`Real`]; the aliases below fix the
//! scalar to `f64`, which is what the loop and benchmarks use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acquisition;
pub mod benchmarks;
pub mod blr;
pub mod bo;
pub mod error;
pub mod graph;
pub mod mcmc;
pub mod numerics;
pub mod scalar;
pub mod surrogate;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Mat = numerics::Mat<f64>;
pub type SurrogateParams = surrogate::SurrogateParams<f64>;
pub type GraphInput = surrogate::GraphInput<f64>;
pub type BlrHyper = blr::BlrHyper<f64>;
pub type BlrPosterior = blr::BlrPosterior<f64>;
pub type DenseGp = blr::DenseGp<f64>;
pub type HyperSampleSet = mcmc::HyperSampleSet<f64>;
pub type CachedBasis = acquisition::CachedBasis<f64>;
