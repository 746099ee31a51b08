//! Conjugate Normal leaf updates.
//!
//! With residual precision `tau = 1/sigma^2` and leaf prior
//! `Normal(mu0, 1/tau0)`, a leaf holding `n` points whose residuals sum to
//! `s` has posterior precision `P = tau0 + n tau` and posterior mean
//! `(tau0 mu0 + tau s) / P`.

use rand::Rng;
use rand_distr::StandardNormal;

use super::Hyperparams;
use crate::tree::TreeView;

/// Leaf prior in precision form, with the residual precision of the
/// current iteration.
#[derive(Debug, Clone, Copy)]
pub struct LeafPosterior {
    pub prior_mean: f64,
    pub prior_precision: f64,
    pub noise_precision: f64,
}

impl LeafPosterior {
    pub fn new(hp: &Hyperparams, sigma: f64) -> Self {
        Self {
            prior_mean: hp.leaf_mean,
            prior_precision: 1.0 / (hp.leaf_sd * hp.leaf_sd),
            noise_precision: 1.0 / (sigma * sigma),
        }
    }

    #[inline]
    pub fn precision(&self, count: u32) -> f64 {
        self.prior_precision + count as f64 * self.noise_precision
    }

    #[inline]
    pub fn mean(&self, count: u32, sum: f64) -> f64 {
        (self.prior_precision * self.prior_mean + self.noise_precision * sum) / self.precision(count)
    }

    /// Part of the log marginal that depends only on the point count.
    #[inline]
    pub fn count_term(&self, count: u32) -> f64 {
        0.5 * (self.prior_precision / self.precision(count)).ln()
            - 0.5 * self.prior_mean * self.prior_mean * self.prior_precision
    }

    /// Part of the log marginal that depends on the residual sum.
    #[inline]
    pub fn sum_term(&self, count: u32, sum: f64) -> f64 {
        let b = self.prior_precision * self.prior_mean + self.noise_precision * sum;
        0.5 * b * b / self.precision(count)
    }

    pub fn log_marginal(&self, count: u32, sum: f64) -> f64 {
        self.count_term(count) + self.sum_term(count, sum)
    }
}

/// Log marginal likelihood of one leaf with the leaf value integrated out,
/// dropping the factors `(2 pi sigma^2)^(-n/2) exp(-tau q / 2)` that cancel
/// whenever the children of a node are compared with the node itself.
pub fn log_marginal_leaf(count: u32, sum: f64, sigma: f64, hp: &Hyperparams) -> f64 {
    LeafPosterior::new(hp, sigma).log_marginal(count, sum)
}

/// Draws every leaf of `tree` from its conditional posterior, in ascending
/// heap order. `counts` and `sums` are indexed by heap position.
pub fn sample_leaves<R: Rng + ?Sized>(
    tree: &TreeView<'_>,
    counts: &[u32],
    sums: &[f64],
    sigma: f64,
    hp: &Hyperparams,
    rng: &mut R,
) -> Vec<f32> {
    let post = LeafPosterior::new(hp, sigma);
    let mut values = vec![0.0f32; tree.leaf_value.len()];
    for t in tree.leaves() {
        let z: f64 = rng.sample(StandardNormal);
        let p = post.precision(counts[t]);
        values[t] = (post.mean(counts[t], sums[t]) + z / p.sqrt()) as f32;
    }
    values
}
