//! GROW/PRUNE proposals and their structure (prior x proposal) ratios.
//!
//! A node's region is described per axis by the closed range `[lo, hi]` of
//! grid cells it can contain; splits available on that axis are the
//! cutpoints `lo + 1 ..= hi`. Only axes constrained by an ancestor need to be
//! tracked, every other axis keeps its full range `[0, n_axis]`.

use super::{Hyperparams, MoveUniforms};
use crate::tree::{heap_len, node_depth, split_len, TreeView};

/// Per-axis cutpoint counts plus the number of axes that have any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridAvailability {
    cuts: Vec<u8>,
    n_splittable: usize,
}

impl GridAvailability {
    pub fn new(cuts_per_axis: Vec<u8>) -> Self {
        let n_splittable = cuts_per_axis.iter().filter(|&&c| c > 0).count();
        Self {
            cuts: cuts_per_axis,
            n_splittable,
        }
    }

    pub fn cuts(&self) -> &[u8] {
        &self.cuts
    }

    pub fn n_axes(&self) -> usize {
        self.cuts.len()
    }

    pub fn n_splittable(&self) -> usize {
        self.n_splittable
    }
}

#[derive(Debug, Clone, Copy)]
struct AxisRange {
    axis: u16,
    lo: u8,
    hi: u8,
}

/// Grid cells reachable by one node, tracked only on constrained axes.
#[derive(Debug, Clone, Copy)]
pub struct Region {
    ranges: [AxisRange; 8],
    len: usize,
}

impl Region {
    pub fn root() -> Self {
        Self {
            ranges: [AxisRange { axis: 0, lo: 0, hi: 0 }; 8],
            len: 0,
        }
    }

    /// Region of heap node `t`, following the path from the root.
    pub fn of_node(tree: &TreeView<'_>, t: usize, avail: &GridAvailability) -> Self {
        let mut region = Self::root();
        let depth = node_depth(t);
        for level in (1..=depth).rev() {
            let ancestor = t >> level;
            let child = t >> (level - 1);
            region = region.child(
                tree.axis[ancestor],
                tree.cutpoint[ancestor],
                child & 1 == 1,
                avail,
            );
        }
        region
    }

    fn find(&self, axis: u16) -> Option<usize> {
        self.ranges[..self.len].iter().position(|r| r.axis == axis)
    }

    /// Region of the left (`right == false`) or right child after splitting
    /// on `axis` at cutpoint `split`.
    pub fn child(mut self, axis: u16, split: u8, right: bool, avail: &GridAvailability) -> Self {
        let k = match self.find(axis) {
            Some(k) => k,
            None => {
                self.ranges[self.len] = AxisRange {
                    axis,
                    lo: 0,
                    hi: avail.cuts[axis as usize],
                };
                self.len += 1;
                self.len - 1
            }
        };
        let r = &mut self.ranges[k];
        if right {
            r.lo = r.lo.max(split);
        } else {
            r.hi = r.hi.min(split.saturating_sub(1));
        }
        self
    }

    /// Number of cutpoints available on `axis`.
    pub fn n_splits(&self, axis: usize, avail: &GridAvailability) -> u32 {
        match self.find(axis as u16) {
            Some(k) => {
                let r = self.ranges[k];
                r.hi.saturating_sub(r.lo) as u32
            }
            None => avail.cuts[axis] as u32,
        }
    }

    /// Number of axes with at least one available cutpoint.
    pub fn n_axes(&self, avail: &GridAvailability) -> u32 {
        let constrained_open = self.ranges[..self.len]
            .iter()
            .filter(|r| r.hi > r.lo)
            .count();
        (avail.n_splittable - self.len + constrained_open) as u32
    }

    /// The `k`-th (0-based, ascending) axis with an available cutpoint.
    pub(crate) fn nth_axis(&self, k: u32, avail: &GridAvailability) -> u16 {
        let mut seen = 0;
        for a in 0..avail.cuts.len() {
            if self.n_splits(a, avail) > 0 {
                if seen == k {
                    return a as u16;
                }
                seen += 1;
            }
        }
        unreachable!("axis rank {k} beyond the available axes")
    }

    /// Lowest available cutpoint on `axis` (only meaningful when
    /// `n_splits(axis) > 0`).
    pub(crate) fn first_split(&self, axis: u16) -> u8 {
        match self.find(axis) {
            Some(k) => self.ranges[k].lo + 1,
            None => 1,
        }
    }
}

/// A node can get children if it sits above the last level and has a split.
fn can_grow(depth: u32, region: &Region, avail: &GridAvailability, hp: &Hyperparams) -> bool {
    depth + 1 < hp.max_depth as u32 && region.n_axes(avail) > 0
}

/// Prior probability that a node at `depth` with region `region` is internal.
fn growth_probability(depth: u32, region: &Region, avail: &GridAvailability, hp: &Hyperparams) -> f64 {
    if can_grow(depth, region, avail, hp) {
        hp.split_probability(depth)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    Grow,
    Prune,
    /// The tree admits no move; always rejected.
    Null,
}

/// Shape summary of a tree used to pick and score moves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeShape {
    /// Leaves above the last level with at least one available split.
    pub growable: Vec<usize>,
    /// Internal nodes whose two children are leaves.
    pub prunable: Vec<usize>,
}

impl TreeShape {
    pub fn of(tree: &TreeView<'_>, avail: &GridAvailability) -> Self {
        let sl = split_len(tree.max_depth);
        let mut reachable = [false; 256];
        let mut growable = Vec::new();
        let mut prunable = Vec::new();
        if tree.max_depth < 2 {
            return Self { growable, prunable };
        }
        reachable[1] = true;
        for t in 1..sl {
            if t > 1 {
                reachable[t] = reachable[t >> 1] && tree.cutpoint[t >> 1] != 0;
            }
            if !reachable[t] {
                continue;
            }
            if tree.cutpoint[t] == 0 {
                if Region::of_node(tree, t, avail).n_axes(avail) > 0 {
                    growable.push(t);
                }
            } else {
                let leaf_child = |c: usize| c >= sl || tree.cutpoint[c] == 0;
                if leaf_child(2 * t) && leaf_child(2 * t + 1) {
                    prunable.push(t);
                }
            }
        }
        Self { growable, prunable }
    }
}

/// One proposed modification of one tree.
#[derive(Debug, Clone, PartialEq)]
pub struct MoveProposal {
    pub tree: usize,
    pub kind: MoveKind,
    /// Leaf to grow or node to prune (0 for null moves).
    pub node: usize,
    /// Split of the node in the larger of the two trees.
    pub axis: u16,
    pub split: u8,
    /// Growable leaves in the current tree.
    pub growable: u32,
    /// Prunable nodes in the current tree.
    pub prunable: u32,
    /// Axes with available splits at `node`, and splits on `axis` there.
    pub n_axes: u32,
    pub n_splits: u32,
    /// Log of prior ratio times proposal ratio (proposed over current).
    pub log_structure_ratio: f64,
}

impl MoveProposal {
    pub fn null(tree: usize) -> Self {
        Self {
            tree,
            kind: MoveKind::Null,
            node: 0,
            axis: 0,
            split: 0,
            growable: 0,
            prunable: 0,
            n_axes: 0,
            n_splits: 0,
            log_structure_ratio: f64::NEG_INFINITY,
        }
    }

    /// Children of `node` in the larger tree.
    pub fn children(&self) -> (usize, usize) {
        (2 * self.node, 2 * self.node + 1)
    }
}

#[inline]
fn pick(u: f64, count: usize) -> usize {
    ((u * count as f64) as usize).min(count - 1)
}

/// Log of [prior ratio x proposal ratio] for growing `node` of `tree` into a
/// split on (`axis`, `split`), given the shape counts of the current tree.
///
/// The ratio of tree priors is `P_d (1 - P_l)(1 - P_r) / ((1 - P_d) n_axes
/// n_splits)` where the children's growth probabilities are zero when they
/// sit on the last level or have no split left; the proposal ratio is
/// `[p_prune' / w'_new] / [p_grow / (w n_axes n_splits)]`, so the axis and
/// split counts cancel.
#[allow(clippy::too_many_arguments)]
fn grow_log_ratio(
    tree: &TreeView<'_>,
    node: usize,
    axis: u16,
    split: u8,
    region: &Region,
    shape_growable: usize,
    shape_prunable: usize,
    avail: &GridAvailability,
    hp: &Hyperparams,
) -> f64 {
    let depth = node_depth(node);
    let p_node = hp.split_probability(depth);
    let left = region.child(axis, split, false, avail);
    let right = region.child(axis, split, true, avail);
    let left_grows = can_grow(depth + 1, &left, avail, hp);
    let right_grows = can_grow(depth + 1, &right, avail, hp);
    let p_left = growth_probability(depth + 1, &left, avail, hp);
    let p_right = growth_probability(depth + 1, &right, avail, hp);

    let sibling_leaf = node > 1 && {
        let s = node ^ 1;
        s >= split_len(tree.max_depth) || tree.cutpoint[s] == 0
    };
    let growable_after =
        shape_growable - 1 + left_grows as usize + right_grows as usize;
    let prunable_after = shape_prunable + 1 - sibling_leaf as usize;

    let p_grow_now = if shape_prunable == 0 { 1.0 } else { hp.p_grow };
    let p_prune_after = if growable_after == 0 {
        1.0
    } else {
        1.0 - hp.p_grow
    };

    p_node.ln() + (1.0 - p_left).ln() + (1.0 - p_right).ln() - (1.0 - p_node).ln()
        + p_prune_after.ln()
        - (prunable_after as f64).ln()
        - p_grow_now.ln()
        + (shape_growable as f64).ln()
}

/// Draws a GROW or PRUNE move for `tree` from the uniforms of its stream.
///
/// The move kind is GROW with probability `p_grow`, forced to GROW when the
/// tree has nothing to prune and to PRUNE when nothing can grow. The leaf (or
/// prunable node), axis and cutpoint are each chosen uniformly among the
/// legal ones, in ascending order, by scaling one uniform.
pub fn propose_move(
    tree: &TreeView<'_>,
    tree_index: usize,
    avail: &GridAvailability,
    hp: &Hyperparams,
    u: &MoveUniforms,
) -> MoveProposal {
    let shape = TreeShape::of(tree, avail);
    let w = shape.growable.len();
    let wp = shape.prunable.len();
    let kind = match (w > 0, wp > 0) {
        (false, false) => return MoveProposal::null(tree_index),
        (true, false) => MoveKind::Grow,
        (false, true) => MoveKind::Prune,
        (true, true) => {
            if u.kind < hp.p_grow {
                MoveKind::Grow
            } else {
                MoveKind::Prune
            }
        }
    };

    match kind {
        MoveKind::Grow => {
            let node = shape.growable[pick(u.node, w)];
            let region = Region::of_node(tree, node, avail);
            let n_axes = region.n_axes(avail);
            let axis = region.nth_axis(pick(u.axis, n_axes as usize) as u32, avail);
            let n_splits = region.n_splits(axis as usize, avail);
            let split = region.first_split(axis) + pick(u.split, n_splits as usize) as u8;
            let log_structure_ratio =
                grow_log_ratio(tree, node, axis, split, &region, w, wp, avail, hp);
            MoveProposal {
                tree: tree_index,
                kind,
                node,
                axis,
                split,
                growable: w as u32,
                prunable: wp as u32,
                n_axes,
                n_splits,
                log_structure_ratio,
            }
        }
        MoveKind::Prune => {
            let node = shape.prunable[pick(u.node, wp)];
            let axis = tree.axis[node];
            let split = tree.cutpoint[node];
            let region = Region::of_node(tree, node, avail);
            // Score the reverse GROW from the pruned tree.
            let (l, r) = (2 * node, 2 * node + 1);
            let sl = split_len(tree.max_depth);
            let child_growable = |c: usize| {
                can_grow(node_depth(c), &Region::of_node(tree, c, avail), avail, hp) as usize
            };
            let growable_pruned = w + 1 - child_growable(l) - child_growable(r);
            let sibling_leaf = node > 1 && {
                let s = node ^ 1;
                s >= sl || tree.cutpoint[s] == 0
            };
            let prunable_pruned = wp - 1 + sibling_leaf as usize;
            let mut pruned = tree.to_owned();
            pruned.axis[node] = 0;
            pruned.cutpoint[node] = 0;
            let reverse = grow_log_ratio(
                &pruned.view(),
                node,
                axis,
                split,
                &region,
                growable_pruned,
                prunable_pruned,
                avail,
                hp,
            );
            MoveProposal {
                tree: tree_index,
                kind,
                node,
                axis,
                split,
                growable: w as u32,
                prunable: wp as u32,
                n_axes: region.n_axes(avail),
                n_splits: region.n_splits(axis as usize, avail),
                log_structure_ratio: -reverse,
            }
        }
        MoveKind::Null => unreachable!(),
    }
}

/// Sufficient statistics of the two children touched by a move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitStats {
    pub left_count: u32,
    pub left_sum: f64,
    pub right_count: u32,
    pub right_sum: f64,
}

/// Metropolis-Hastings acceptance probability of `proposal`, where `stats`
/// hold the point counts and tree-excluded residual sums of the two
/// children in the larger tree.
pub fn accept_probability(proposal: &MoveProposal, stats: &SplitStats, sigma: f64, hp: &Hyperparams) -> f64 {
    use super::leaf::log_marginal_leaf;
    if proposal.kind == MoveKind::Null {
        return 0.0;
    }
    let split = log_marginal_leaf(stats.left_count, stats.left_sum, sigma, hp)
        + log_marginal_leaf(stats.right_count, stats.right_sum, sigma, hp)
        - log_marginal_leaf(
            stats.left_count + stats.right_count,
            stats.left_sum + stats.right_sum,
            sigma,
            hp,
        );
    let sign = if proposal.kind == MoveKind::Grow { 1.0 } else { -1.0 };
    let log_ratio = proposal.log_structure_ratio + sign * split;
    log_ratio.exp().min(1.0)
}

/// Heap indices spanned by a tree of depth `d`, for sizing per-node buffers.
pub fn node_slots(max_depth: u8) -> usize {
    heap_len(max_depth)
}
