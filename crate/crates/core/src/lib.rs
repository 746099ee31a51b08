//! Branchless Bayesian Additive Regression Trees.
//!
//! Trees are fixed-depth heaps ([`tree`]), predictors are byte-quantized
//! grid indices ([`grid`]) and the Metropolis-within-Gibbs sampler
//! ([`sampler`]) keeps a per-tree leaf index cache and a residual cache so
//! that every iteration executes the same sequence of array passes
//! regardless of the data or of which moves get accepted.
//!
//! [`interface`] wraps everything into `fit`/`predict`; [`dgp`] and
//! [`bench`] provide the synthetic benchmark processes and harness.

pub mod bench;
pub mod cli;
pub mod container;
pub mod data;
pub mod dgp;
mod error;
pub mod grid;
pub mod interface;
pub mod rng;
pub mod sampler;
pub mod tree;

pub use error::Error;
pub use grid::{CutpointGrid, GridScheme, QuantizedMatrix};
pub use interface::{derive_hyperparams, fit, FitConfig, Trace};
pub use sampler::{Hyperparams, SamplerState};
pub use tree::{evaluate_forest, traverse_forest, Forest, TreeHeap};
