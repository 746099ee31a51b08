//! Indexed reductions and cache passes over one tree's leaf-index column.
//!
//! Every function here makes exactly one pass over all `n` points and does
//! the same work per point whatever the indices hold; "no-op" variants are
//! expressed with target values that never match (`NO_LEAF`, `NO_NODE`).

use crate::grid::QuantizedMatrix;

/// Grow target that matches no heap index (slot 0 is never used).
pub const NO_LEAF: u8 = 0;

/// Collapse target that is the parent of no heap index (parents are < 128).
pub const NO_NODE: u8 = u8::MAX;

/// `counts[t]` = number of points whose index is `t`.
pub fn count_points_per_leaf(indices: &[u8], counts: &mut [u32]) {
    counts.fill(0);
    for &l in indices {
        counts[l as usize] += 1;
    }
}

/// `sums[t]` = sum of residuals of the points whose index is `t`, with f64
/// accumulators filled in point order.
pub fn sum_residuals_per_leaf(residuals: &[f32], indices: &[u8], sums: &mut [f64]) {
    sums.fill(0.0);
    for (&r, &l) in residuals.iter().zip(indices) {
        sums[l as usize] += r as f64;
    }
}

/// Adds back the current tree's own contribution, `value[t] * count[t]`, so
/// the sums become sums of residuals with that tree excluded.
pub fn exclude_tree_contribution(sums: &mut [f64], counts: &[u32], values: &[f32]) {
    for ((s, &c), &v) in sums.iter_mut().zip(counts).zip(values) {
        *s += v as f64 * c as f64;
    }
}

/// Moves the points sitting in leaf `node` to its new children after a split
/// on (`axis`, `split`). With `node == NO_LEAF` nothing changes.
pub fn grow_indices(indices: &mut [u8], x: &QuantizedMatrix, node: u8, axis: u16, split: u8) {
    let column = x.column(axis as usize);
    let left = node.wrapping_mul(2);
    for (l, &v) in indices.iter_mut().zip(column) {
        let child = left + (v >= split) as u8;
        *l = if *l == node { child } else { *l };
    }
}

/// Applies the residual change of a tree update and collapses the children
/// of `node` back into `node`. `delta[t]` is old minus new value of the
/// leaf reached through heap index `t`.
pub fn update_residuals_and_collapse(residuals: &mut [f32], indices: &mut [u8], delta: &[f32], node: u8) {
    for (r, l) in residuals.iter_mut().zip(indices.iter_mut()) {
        *r += delta[*l as usize];
        *l = if *l >> 1 == node { node } else { *l };
    }
}
