//! Dense kernels, activations and the Adam optimizer.

pub mod activation;
pub mod adam;
pub mod linalg;
pub mod mat;
pub mod sparse;

pub use activation::{row_softmax, row_softmax_backward, Activation};
pub use adam::AdamState;
pub use linalg::{logdet_spd, solve_spd, Cholesky, SymmetricEigen};
pub use mat::{dot, Mat};
pub use sparse::SparseRows;
