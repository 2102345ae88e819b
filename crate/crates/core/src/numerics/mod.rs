//! From-scratch numeric kernels: a dense matrix, the Adam optimiser,
//! logistic regression, the one-hidden-layer translation network, and a
//! randomized truncated SVD for sparse co-occurrence matrices. Everything is
//! seeded explicitly and bit-deterministic for a fixed seed.

mod adam;
mod logistic;
mod matrix;
mod net;
mod svd;

pub use adam::AdamState;
pub use logistic::{train_logistic, LogisticConfig, LogisticFit, LogisticModel, CONVERGENCE_DELTA};
pub use matrix::{dot, norm, DenseMatrix};
pub use net::{gradient_check, mse_loss, train_translation_net, NetConfig, TranslationNet};
pub use svd::{truncated_svd, Svd, OVERSAMPLING, POWER_ITERATIONS};
