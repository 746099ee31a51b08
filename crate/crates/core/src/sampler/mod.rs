//! Metropolis-within-Gibbs sampler over a forest of heap trees.
//!
//! One call to [`SamplerState::step`] is one MCMC iteration, organised as
//! fixed-shape array passes:
//!
//! Tree-parallel (all trees at once, see [`SamplerState::step`]):
//! 1. draw the per-tree random numbers and propose a GROW or PRUNE move;
//! 2. rewrite the tree's leaf-index column for the larger of the current and
//!    proposed trees (grown tree for GROW, current tree otherwise);
//! 3. count points per heap node;
//! 4. compute the conditional posterior precision of every candidate leaf;
//! 5. scale the standard normal draws to those precisions (still centred);
//! 6. evaluate every count-only term of the acceptance ratio.
//!
//! Tree-sequential (tree 0, 1, ..., m-1):
//! 7. sum the residuals per heap node;
//! 8. add back the tree's own leaf value times the count;
//! 9. finish the acceptance ratio and accept or reject;
//! 10. add the posterior means to the centred leaf draws;
//! 11. update the residuals by old minus new prediction and collapse the
//!     leaf-index column to the final tree.
//!
//! Finally the error standard deviation is redrawn from the residuals.
//!
//! # Random number consumption
//!
//! All draws come from [`ChainKey`] streams addressed by iteration. Tree `j`
//! reads five `f64` uniforms (move kind, node, axis, cutpoint, acceptance)
//! followed by `2^D - 1` standard normals, the `t`-th used for a leaf that
//! ends up at heap index `t`. The error variance uses one chi-squared draw
//! from the iteration's sigma stream.
//!
//! # Arithmetic contract
//!
//! Residuals and leaf values are `f32`. Per-node sums use `f64` accumulators
//! filled in point order; a node that absorbs its two children (pruned or
//! not grown) takes left sum + right sum. Residuals change by
//! `old_leaf - new_leaf`, computed in `f32`.

pub mod leaf;
pub mod moves;
pub mod prior;
pub mod reduce;
pub mod sigma;

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use leaf::{log_marginal_leaf, sample_leaves, LeafPosterior};
pub use moves::{accept_probability, propose_move, GridAvailability, MoveKind, MoveProposal, SplitStats, TreeShape};
pub use prior::sample_prior_tree;
pub use reduce::{count_points_per_leaf, sum_residuals_per_leaf, NO_LEAF, NO_NODE};
pub use sigma::sample_sigma;

use crate::grid::QuantizedMatrix;
use crate::rng::ChainKey;
use crate::tree::{heap_len, split_len, traverse_forest, Forest, LeafIndexMatrix, MAX_SUPPORTED_DEPTH};
use crate::Error;

/// Model hyperparameters. Leaf and noise parameters refer to the scale the
/// sampler sees (the interface module works in a rescaled response space).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub alpha: f64,
    pub beta: f64,
    pub n_trees: usize,
    /// Prior mean of each leaf value.
    pub leaf_mean: f64,
    /// Prior standard deviation of each leaf value.
    pub leaf_sd: f64,
    pub nu: f64,
    pub lambda: f64,
    pub max_depth: u8,
    /// Probability of proposing GROW when both moves are possible.
    pub p_grow: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            alpha: 0.95,
            beta: 2.0,
            n_trees: 200,
            leaf_mean: 0.0,
            leaf_sd: 0.5 / (2.0 * 200f64.sqrt()),
            nu: 3.0,
            lambda: 1.0,
            max_depth: 6,
            p_grow: 0.5,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |what: &str| Err(Error::Config(format!("invalid hyperparameter: {what}")));
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("alpha must lie in [0, 1]");
        }
        if !(self.beta >= 0.0) {
            return bad("beta must be >= 0");
        }
        if self.n_trees == 0 {
            return bad("at least one tree");
        }
        if !(self.leaf_sd > 0.0 && self.leaf_sd.is_finite()) || !self.leaf_mean.is_finite() {
            return bad("leaf prior needs finite mean and positive sd");
        }
        if !(self.nu > 0.0 && self.lambda > 0.0) {
            return bad("nu and lambda must be positive");
        }
        if !(1..=MAX_SUPPORTED_DEPTH).contains(&self.max_depth) {
            return bad("max depth must be in 1..=8");
        }
        if !(self.p_grow > 0.0 && self.p_grow < 1.0) {
            return bad("p_grow must lie in (0, 1)");
        }
        Ok(())
    }

    /// Probability that a node at `depth` is internal, `alpha / (1 + d)^beta`,
    /// and 0 on the last level.
    pub fn split_probability(&self, depth: u32) -> f64 {
        if depth + 1 >= self.max_depth as u32 {
            0.0
        } else {
            self.alpha / (1.0 + depth as f64).powf(self.beta)
        }
    }
}

/// The five uniforms that drive one tree's move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveUniforms {
    pub kind: f64,
    pub node: f64,
    pub axis: f64,
    pub split: f64,
    pub accept: f64,
}

/// Every random number one tree consumes in one iteration.
#[derive(Debug, Clone)]
pub struct TreeDraws {
    pub uniforms: MoveUniforms,
    /// Standard normals indexed by heap position; slot 0 is unused.
    pub normals: Vec<f64>,
}

impl TreeDraws {
    pub fn generate<R: Rng + ?Sized>(rng: &mut R, max_depth: u8) -> Self {
        let uniforms = MoveUniforms {
            kind: rng.random(),
            node: rng.random(),
            axis: rng.random(),
            split: rng.random(),
            accept: rng.random(),
        };
        let mut normals = vec![0.0; heap_len(max_depth)];
        for z in normals.iter_mut().skip(1) {
            *z = rng.sample(StandardNormal);
        }
        Self { uniforms, normals }
    }
}

/// Work executed by the sampler, counted per pass. Every field advances by
/// an amount that depends only on `n`, `m` and `D`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkCounters {
    pub iterations: u64,
    pub proposals: u64,
    pub index_updates: u64,
    pub count_reductions: u64,
    pub sum_reductions: u64,
    pub residual_updates: u64,
    pub normal_draws: u64,
    pub leaf_updates: u64,
}

/// Tree-parallel intermediate results for one tree.
struct TreeWork {
    proposal: MoveProposal,
    accept_u: f64,
    /// Point counts per heap node of the larger tree.
    counts: Vec<u32>,
    /// Value each heap node of the larger tree had before the move.
    old_values: Vec<f32>,
    /// Centred leaf draws per heap node; at `node` the draw for the merged
    /// leaf.
    centred: Vec<f64>,
    merged_count: u32,
    partial_log_ratio: f64,
}

/// Full sampler state of one chain.
#[derive(Debug, Clone)]
pub struct SamplerState {
    hp: Hyperparams,
    x: Arc<QuantizedMatrix>,
    y: Vec<f32>,
    avail: GridAvailability,
    forest: Forest,
    residuals: Vec<f32>,
    leaf_index: LeafIndexMatrix,
    sigma: f64,
    sigma_fixed: bool,
    key: ChainKey,
    iteration: u64,
    counters: WorkCounters,
    accepted: Vec<bool>,
    kinds: Vec<MoveKind>,
}

impl SamplerState {
    /// Starts from root-only trees with leaves at the prior mean.
    pub fn new(
        x: Arc<QuantizedMatrix>,
        y: Vec<f32>,
        hp: Hyperparams,
        sigma: f64,
        key: ChainKey,
    ) -> Result<Self, Error> {
        let forest = Forest::root_only(hp.n_trees, hp.max_depth, hp.leaf_mean as f32)?;
        Self::with_forest(x, y, hp, sigma, key, forest)
    }

    /// Starts from an explicit forest; caches are computed from scratch.
    pub fn with_forest(
        x: Arc<QuantizedMatrix>,
        y: Vec<f32>,
        hp: Hyperparams,
        sigma: f64,
        key: ChainKey,
        forest: Forest,
    ) -> Result<Self, Error> {
        hp.validate()?;
        if y.len() != x.n_rows() {
            return Err(Error::Shape(format!(
                "{} responses for {} predictor rows",
                y.len(),
                x.n_rows()
            )));
        }
        if forest.n_trees() != hp.n_trees || forest.max_depth() != hp.max_depth {
            return Err(Error::Config("forest does not match the hyperparameters".into()));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Config("initial sigma must be positive".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite response".into()));
        }
        let avail = GridAvailability::new(x.grid().cuts_per_axis());
        let leaf_index = traverse_forest(&forest, &x);
        let residuals = y
            .iter()
            .enumerate()
            .map(|(i, &yi)| {
                let f: f64 = forest
                    .trees()
                    .enumerate()
                    .map(|(j, t)| t.leaf_value[leaf_index.get(i, j) as usize] as f64)
                    .sum();
                (yi as f64 - f) as f32
            })
            .collect();
        let m = hp.n_trees;
        Ok(Self {
            hp,
            x,
            y,
            avail,
            forest,
            residuals,
            leaf_index,
            sigma,
            sigma_fixed: false,
            key,
            iteration: 0,
            counters: WorkCounters::default(),
            accepted: vec![false; m],
            kinds: vec![MoveKind::Null; m],
        })
    }

    /// Keeps sigma at its current value instead of resampling it.
    pub fn fix_sigma(&mut self, fixed: bool) {
        self.sigma_fixed = fixed;
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hp
    }

    pub fn forest(&self) -> &Forest {
        &self.forest
    }

    pub fn residuals(&self) -> &[f32] {
        &self.residuals
    }

    pub fn responses(&self) -> &[f32] {
        &self.y
    }

    pub fn leaf_indices(&self) -> &LeafIndexMatrix {
        &self.leaf_index
    }

    pub fn predictors(&self) -> &Arc<QuantizedMatrix> {
        &self.x
    }

    pub fn availability(&self) -> &GridAvailability {
        &self.avail
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn set_sigma(&mut self, sigma: f64) {
        assert!(sigma > 0.0);
        self.sigma = sigma;
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn key(&self) -> ChainKey {
        self.key
    }

    pub fn counters(&self) -> WorkCounters {
        self.counters
    }

    /// Whether each tree's move was accepted in the last iteration.
    pub fn last_accepted(&self) -> &[bool] {
        &self.accepted
    }

    /// Move kind proposed to each tree in the last iteration.
    pub fn last_moves(&self) -> &[MoveKind] {
        &self.kinds
    }

    /// Bytes held by the two byte matrices: predictors (`n p`) and leaf
    /// indices (`n m`).
    pub fn byte_matrix_payload(&self) -> usize {
        self.x.payload_bytes() + self.leaf_index.payload_bytes()
    }

    /// Proposals the next call to [`step`](Self::step) will evaluate.
    pub fn propose_moves(&self) -> Vec<MoveProposal> {
        (0..self.hp.n_trees)
            .into_par_iter()
            .map(|j| {
                let mut rng = self.key.tree_stream(self.iteration, j);
                let draws = TreeDraws::generate(&mut rng, self.hp.max_depth);
                propose_move(&self.forest.tree(j), j, &self.avail, &self.hp, &draws.uniforms)
            })
            .collect()
    }

    /// Runs one full iteration.
    pub fn step(&mut self) {
        let hp = &self.hp;
        let d = hp.max_depth;
        let hl = heap_len(d);
        let n = self.x.n_rows() as u64;
        let post = LeafPosterior::new(hp, self.sigma);
        let iteration = self.iteration;
        let key = self.key;
        let forest = &self.forest;
        let avail = &self.avail;
        let x = &*self.x;

        // Phases 1-6, independent across trees.
        let mut works: Vec<TreeWork> = self
            .leaf_index
            .columns_mut()
            .enumerate()
            .map(|(j, column)| {
                let tree = forest.tree(j);
                let mut rng = key.tree_stream(iteration, j);
                let draws = TreeDraws::generate(&mut rng, d);
                let proposal = propose_move(&tree, j, avail, hp, &draws.uniforms);
                let grow = proposal.kind == MoveKind::Grow;

                let target = if grow { proposal.node as u8 } else { NO_LEAF };
                reduce::grow_indices(column, x, target, proposal.axis, proposal.split);

                let mut counts = vec![0u32; hl];
                count_points_per_leaf(column, &mut counts);

                let mut old_values = tree.leaf_value.to_vec();
                if grow {
                    let (l, r) = proposal.children();
                    old_values[l] = tree.leaf_value[proposal.node];
                    old_values[r] = tree.leaf_value[proposal.node];
                }

                let (l, r) = proposal.children();
                let merged_count = if proposal.kind == MoveKind::Null {
                    0
                } else {
                    counts[l] + counts[r]
                };
                let mut centred: Vec<f64> = counts
                    .iter()
                    .zip(&draws.normals)
                    .map(|(&c, &z)| z / post.precision(c).sqrt())
                    .collect();
                if proposal.kind != MoveKind::Null {
                    centred[proposal.node] =
                        draws.normals[proposal.node] / post.precision(merged_count).sqrt();
                }

                let partial_log_ratio = match proposal.kind {
                    MoveKind::Null => f64::NEG_INFINITY,
                    kind => {
                        let split = post.count_term(counts[l]) + post.count_term(counts[r])
                            - post.count_term(merged_count);
                        let sign = if kind == MoveKind::Grow { 1.0 } else { -1.0 };
                        proposal.log_structure_ratio + sign * split
                    }
                };

                TreeWork {
                    accept_u: draws.uniforms.accept,
                    proposal,
                    counts,
                    old_values,
                    centred,
                    merged_count,
                    partial_log_ratio,
                }
            })
            .collect();

        let m = hp.n_trees as u64;
        self.counters.proposals += m;
        self.counters.index_updates += n * m;
        self.counters.count_reductions += n * m;
        self.counters.normal_draws += (hl as u64 - 1) * m;

        // Phases 7-11, tree after tree.
        let mut sums = vec![0.0f64; hl];
        let mut new_values = vec![0.0f32; hl];
        let mut delta = vec![0.0f32; hl];
        for (j, work) in works.iter_mut().enumerate() {
            let column = self.leaf_index.column_mut(j);
            sum_residuals_per_leaf(&self.residuals, column, &mut sums);
            reduce::exclude_tree_contribution(&mut sums, &work.counts, &work.old_values);

            let p = &work.proposal;
            let (l, r) = p.children();
            let accepted = match p.kind {
                MoveKind::Null => false,
                kind => {
                    let merged_sum = sums[l] + sums[r];
                    let split = post.sum_term(work.counts[l], sums[l])
                        + post.sum_term(work.counts[r], sums[r])
                        - post.sum_term(work.merged_count, merged_sum);
                    let sign = if kind == MoveKind::Grow { 1.0 } else { -1.0 };
                    let log_ratio = work.partial_log_ratio + sign * split;
                    work.accept_u < log_ratio.exp()
                }
            };
            let collapse = match p.kind {
                MoveKind::Grow => !accepted,
                MoveKind::Prune => accepted,
                MoveKind::Null => false,
            };

            // Structure of the final tree, then its leaf values.
            let (axis, cut, values) = self.forest.tree_mut(j);
            if p.kind == MoveKind::Grow && accepted {
                axis[p.node] = p.axis;
                cut[p.node] = p.split;
            }
            if collapse && p.kind == MoveKind::Prune {
                axis[p.node] = 0;
                cut[p.node] = 0;
            }
            let sl = split_len(d);
            let mut leaf = [false; 256];
            let mut reach = [false; 256];
            reach[1] = true;
            for t in 1..hl {
                if t > 1 {
                    reach[t] = reach[t >> 1] && cut[t >> 1] != 0;
                }
                leaf[t] = reach[t] && (t >= sl || cut[t] == 0);
            }
            for t in 1..hl {
                new_values[t] = if !leaf[t] {
                    0.0
                } else if collapse && t == p.node {
                    (post.mean(work.merged_count, sums[l] + sums[r]) + work.centred[t]) as f32
                } else {
                    (post.mean(work.counts[t], sums[t]) + work.centred[t]) as f32
                };
            }
            for t in 1..hl {
                let now = if collapse && (t == l || t == r) {
                    new_values[p.node]
                } else {
                    new_values[t]
                };
                delta[t] = work.old_values[t] - now;
            }
            values.copy_from_slice(&new_values);

            let target = if collapse { p.node as u8 } else { NO_NODE };
            reduce::update_residuals_and_collapse(&mut self.residuals, column, &delta, target);

            self.accepted[j] = accepted;
            self.kinds[j] = p.kind;
        }
        self.counters.sum_reductions += n * m;
        self.counters.residual_updates += n * m;
        self.counters.leaf_updates += hl as u64 * m;

        if !self.sigma_fixed {
            let mut rng = self.key.sigma_stream(iteration);
            self.sigma = sample_sigma(&self.residuals, &self.hp, &mut rng);
        }
        self.iteration += 1;
        self.counters.iterations += 1;
    }

    /// Residuals recomputed from scratch in f64: `y - f(x)`.
    pub fn exact_residuals(&self) -> Vec<f64> {
        let f = crate::tree::evaluate_forest(&self.forest, &self.x);
        self.y.iter().zip(f).map(|(&y, f)| y as f64 - f).collect()
    }
}
