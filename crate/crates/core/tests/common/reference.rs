//! Cache-free sampler: every quantity is recomputed from the trees by
//! recursive descent and per-point loops, and acceptance ratios come from
//! full tree priors and proposal probabilities rather than incremental
//! formulas. It consumes the same random streams and follows the same float
//! contract for leaf values and residuals, so its state can be compared
//! bit for bit with the optimized sampler.

use bartforge::rng::ChainKey;
use bartforge::sampler::Hyperparams;
use bartforge::TreeHeap;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

pub fn depth_of(t: usize) -> u32 {
    let mut d = 0;
    let mut t = t;
    while t > 1 {
        t /= 2;
        d += 1;
    }
    d
}

pub fn is_leaf(tree: &TreeHeap, t: usize) -> bool {
    t >= tree.cutpoint.len() || tree.cutpoint[t] == 0
}

/// Leaf reached from node `t` by a point with grid cells `cells`.
pub fn leaf_of(tree: &TreeHeap, cells: &[u8], t: usize) -> usize {
    if is_leaf(tree, t) {
        return t;
    }
    if cells[tree.axis[t] as usize] >= tree.cutpoint[t] {
        leaf_of(tree, cells, 2 * t + 1)
    } else {
        leaf_of(tree, cells, 2 * t)
    }
}

/// Cutpoints of `axis` that still separate points at node `t`: those
/// strictly between the largest cut passed on the right and the smallest
/// cut passed on the left.
pub fn open_splits(tree: &TreeHeap, t: usize, axis: usize, n_cuts: u8) -> Vec<u8> {
    let mut lo = 0u32;
    let mut hi = n_cuts as u32 + 1;
    let depth = depth_of(t);
    for level in 0..depth {
        let ancestor = t >> (depth - level);
        let went_right = (t >> (depth - level - 1)) & 1 == 1;
        if tree.axis[ancestor] as usize == axis {
            let c = tree.cutpoint[ancestor] as u32;
            if went_right {
                lo = lo.max(c);
            } else {
                hi = hi.min(c);
            }
        }
    }
    ((lo + 1)..hi).map(|c| c as u8).collect()
}

pub fn open_axes(tree: &TreeHeap, t: usize, cuts: &[u8]) -> Vec<usize> {
    (0..cuts.len())
        .filter(|&a| !open_splits(tree, t, a, cuts[a]).is_empty())
        .collect()
}

pub fn can_grow(tree: &TreeHeap, t: usize, cuts: &[u8]) -> bool {
    depth_of(t) + 1 < tree.max_depth as u32 && !open_axes(tree, t, cuts).is_empty()
}

fn collect(tree: &TreeHeap, t: usize, leaves: &mut Vec<usize>, internal: &mut Vec<usize>) {
    if is_leaf(tree, t) {
        leaves.push(t);
    } else {
        internal.push(t);
        collect(tree, 2 * t, leaves, internal);
        collect(tree, 2 * t + 1, leaves, internal);
    }
}

/// Leaves and internal nodes, each sorted by heap index.
pub fn nodes(tree: &TreeHeap) -> (Vec<usize>, Vec<usize>) {
    let (mut leaves, mut internal) = (Vec::new(), Vec::new());
    collect(tree, 1, &mut leaves, &mut internal);
    leaves.sort_unstable();
    internal.sort_unstable();
    (leaves, internal)
}

pub fn growable(tree: &TreeHeap, cuts: &[u8]) -> Vec<usize> {
    nodes(tree).0.into_iter().filter(|&t| can_grow(tree, t, cuts)).collect()
}

pub fn prunable(tree: &TreeHeap) -> Vec<usize> {
    nodes(tree)
        .1
        .into_iter()
        .filter(|&t| is_leaf(tree, 2 * t) && is_leaf(tree, 2 * t + 1))
        .collect()
}

fn split_prob(hp: &Hyperparams, depth: u32) -> f64 {
    hp.alpha * (1.0 + depth as f64).powf(-hp.beta)
}

/// Log prior probability of the structure below node `t`.
pub fn log_prior(tree: &TreeHeap, t: usize, cuts: &[u8], hp: &Hyperparams) -> f64 {
    let d = depth_of(t);
    if is_leaf(tree, t) {
        return if can_grow(tree, t, cuts) {
            (1.0 - split_prob(hp, d)).ln()
        } else {
            0.0
        };
    }
    let axis = tree.axis[t] as usize;
    split_prob(hp, d).ln()
        - (open_axes(tree, t, cuts).len() as f64).ln()
        - (open_splits(tree, t, axis, cuts[axis]).len() as f64).ln()
        + log_prior(tree, 2 * t, cuts, hp)
        + log_prior(tree, 2 * t + 1, cuts, hp)
}

/// Probability that the proposal picks GROW for `tree`.
fn grow_chance(tree: &TreeHeap, cuts: &[u8], hp: &Hyperparams) -> f64 {
    match (growable(tree, cuts).is_empty(), prunable(tree).is_empty()) {
        (false, true) => 1.0,
        (true, false) => 0.0,
        (false, false) => hp.p_grow,
        (true, true) => 0.0,
    }
}

/// Log probability of proposing the split (`axis`, `split`) at leaf `t`.
fn log_q_grow(tree: &TreeHeap, t: usize, axis: usize, cuts: &[u8], hp: &Hyperparams) -> f64 {
    grow_chance(tree, cuts, hp).ln()
        - (growable(tree, cuts).len() as f64).ln()
        - (open_axes(tree, t, cuts).len() as f64).ln()
        - (open_splits(tree, t, axis, cuts[axis]).len() as f64).ln()
}

/// Log probability of proposing to prune node `t`.
fn log_q_prune(tree: &TreeHeap, cuts: &[u8], hp: &Hyperparams) -> f64 {
    (1.0 - grow_chance(tree, cuts, hp)).ln() - (prunable(tree).len() as f64).ln()
}

/// Log marginal likelihood of one leaf relative to a zero leaf value, from
/// completing the square in the leaf value.
fn leaf_evidence(count: u32, sum: f64, sigma: f64, hp: &Hyperparams) -> f64 {
    let prior_prec = hp.leaf_sd.powi(-2);
    let post_prec = prior_prec + count as f64 / (sigma * sigma);
    let b = prior_prec * hp.leaf_mean + sum / (sigma * sigma);
    0.5 * (prior_prec / post_prec).ln() + 0.5 * b * b / post_prec - 0.5 * prior_prec * hp.leaf_mean * hp.leaf_mean
}

fn pick(u: f64, count: usize) -> usize {
    ((u * count as f64).floor() as usize).min(count - 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Move {
    Grow { node: usize, axis: u16, split: u8 },
    Prune { node: usize },
}

pub struct NaiveSampler {
    pub hp: Hyperparams,
    pub rows: Vec<Vec<u8>>,
    pub cuts: Vec<u8>,
    pub y: Vec<f32>,
    pub trees: Vec<TreeHeap>,
    pub residuals: Vec<f32>,
    pub sigma: f64,
    pub sigma_fixed: bool,
    pub key: ChainKey,
    pub iteration: u64,
    pub accepted: Vec<bool>,
}

impl NaiveSampler {
    pub fn new(rows: Vec<Vec<u8>>, cuts: Vec<u8>, y: Vec<f32>, hp: Hyperparams, sigma: f64, key: ChainKey) -> Self {
        let trees: Vec<TreeHeap> = (0..hp.n_trees)
            .map(|_| TreeHeap::root_only(hp.max_depth, hp.leaf_mean as f32).unwrap())
            .collect();
        let residuals = rows
            .iter()
            .zip(&y)
            .map(|(row, &yi)| {
                let f: f64 = trees.iter().map(|t| t.leaf_value[leaf_of(t, row, 1)] as f64).sum();
                (yi as f64 - f) as f32
            })
            .collect();
        let m = hp.n_trees;
        Self {
            hp,
            rows,
            cuts,
            y,
            trees,
            residuals,
            sigma,
            sigma_fixed: false,
            key,
            iteration: 0,
            accepted: vec![false; m],
        }
    }

    fn propose(&self, tree: &TreeHeap, u: &[f64; 5]) -> Option<Move> {
        let g = growable(tree, &self.cuts);
        let p = prunable(tree);
        let grow = match (g.is_empty(), p.is_empty()) {
            (true, true) => return None,
            (false, true) => true,
            (true, false) => false,
            (false, false) => u[0] < self.hp.p_grow,
        };
        if grow {
            let node = g[pick(u[1], g.len())];
            let axes = open_axes(tree, node, &self.cuts);
            let axis = axes[pick(u[2], axes.len())];
            let splits = open_splits(tree, node, axis, self.cuts[axis]);
            let split = splits[pick(u[3], splits.len())];
            Some(Move::Grow { node, axis: axis as u16, split })
        } else {
            Some(Move::Prune { node: p[pick(u[1], p.len())] })
        }
    }

    pub fn step(&mut self) {
        let hp = self.hp.clone();
        let prior_prec = 1.0 / (hp.leaf_sd * hp.leaf_sd);
        let noise_prec = 1.0 / (self.sigma * self.sigma);
        let precision = |c: u32| prior_prec + c as f64 * noise_prec;
        let mean = |c: u32, s: f64| (prior_prec * hp.leaf_mean + noise_prec * s) / precision(c);

        for j in 0..hp.n_trees {
            let mut rng = self.key.tree_stream(self.iteration, j);
            let u: [f64; 5] = std::array::from_fn(|_| rng.random::<f64>());
            let mut z = vec![0.0f64; 1 << hp.max_depth];
            for v in z.iter_mut().skip(1) {
                *v = rng.sample(StandardNormal);
            }

            let current = self.trees[j].clone();
            let mv = self.propose(&current, &u);
            let mut proposed = current.clone();
            match mv {
                Some(Move::Grow { node, axis, split }) => proposed.split_leaf(node, axis, split),
                Some(Move::Prune { node }) => {
                    proposed.axis[node] = 0;
                    proposed.cutpoint[node] = 0;
                }
                None => {}
            }
            let larger = match mv {
                Some(Move::Grow { .. }) => &proposed,
                _ => &current,
            };

            // Per-node statistics on the larger tree, residuals in point order.
            let slots = 1 << hp.max_depth;
            let mut counts = vec![0u32; slots];
            let mut sums = vec![0.0f64; slots];
            let mut own = vec![0.0f32; slots];
            for (row, &r) in self.rows.iter().zip(&self.residuals) {
                let t = leaf_of(larger, row, 1);
                counts[t] += 1;
                sums[t] += r as f64;
                own[t] = current.leaf_value[leaf_of(&current, row, 1)];
            }
            for t in 0..slots {
                sums[t] += own[t] as f64 * counts[t] as f64;
            }

            let (accepted, node) = match mv {
                None => (false, 0),
                Some(m) => {
                    let (node, sign) = match m {
                        Move::Grow { node, .. } => (node, 1.0),
                        Move::Prune { node } => (node, -1.0),
                    };
                    let (l, r) = (2 * node, 2 * node + 1);
                    let prior = log_prior(&proposed, 1, &self.cuts, &hp) - log_prior(&current, 1, &self.cuts, &hp);
                    let proposal = match m {
                        Move::Grow { axis, .. } => {
                            log_q_prune(&proposed, &self.cuts, &hp)
                                - log_q_grow(&current, node, axis as usize, &self.cuts, &hp)
                        }
                        Move::Prune { .. } => {
                            log_q_grow(&proposed, node, current.axis[node] as usize, &self.cuts, &hp)
                                - log_q_prune(&current, &self.cuts, &hp)
                        }
                    };
                    let split_gain = leaf_evidence(counts[l], sums[l], self.sigma, &hp)
                        + leaf_evidence(counts[r], sums[r], self.sigma, &hp)
                        - leaf_evidence(counts[l] + counts[r], sums[l] + sums[r], self.sigma, &hp);
                    (u[4] < (prior + proposal + sign * split_gain).exp(), node)
                }
            };
            let mut fin = if accepted { proposed.clone() } else { current.clone() };
            let merged = match mv {
                Some(Move::Grow { .. }) => !accepted,
                Some(Move::Prune { .. }) => accepted,
                None => false,
            };

            fin.leaf_value.iter_mut().for_each(|v| *v = 0.0);
            for t in nodes(&fin).0 {
                let (c, s) = if merged && t == node {
                    (counts[2 * t] + counts[2 * t + 1], sums[2 * t] + sums[2 * t + 1])
                } else {
                    (counts[t], sums[t])
                };
                fin.leaf_value[t] = (mean(c, s) + z[t] / precision(c).sqrt()) as f32;
            }

            for (row, r) in self.rows.iter().zip(self.residuals.iter_mut()) {
                let old = current.leaf_value[leaf_of(&current, row, 1)];
                let new = fin.leaf_value[leaf_of(&fin, row, 1)];
                *r += old - new;
            }
            self.trees[j] = fin;
            self.accepted[j] = accepted;
        }

        if !self.sigma_fixed {
            let mut rng = self.key.sigma_stream(self.iteration);
            let x: f64 = ChiSquared::new(hp.nu + self.residuals.len() as f64).unwrap().sample(&mut rng);
            let ss: f64 = self.residuals.iter().map(|&r| (r as f64) * (r as f64)).sum();
            self.sigma = ((hp.nu * hp.lambda + ss) / x).sqrt();
        }
        self.iteration += 1;
    }
}
