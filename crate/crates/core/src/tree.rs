//! Fixed-depth decision trees stored as implicit binary heaps.
//!
//! A tree of maximum depth `D` is three flat arrays indexed by heap position:
//! the root lives at index 1 and node `t` has children `2t` and `2t + 1`.
//! Index 0 is never used. Only nodes above the last level can split, so the
//! axis and cutpoint arrays hold `2^(D-1)` entries while the leaf values hold
//! `2^D`. A cutpoint of 0 marks a leaf; real cutpoints start at 1 and refer to
//! grid indices (see [`crate::grid`]).
//!
//! Entries that carry no meaning (nonexistent nodes, axis/cutpoint of leaves,
//! values of internal nodes) are kept at 0 so two equal trees are equal
//! bytewise.

use rayon::prelude::*;

use crate::grid::QuantizedMatrix;
use crate::Error;

/// Deepest tree supported: leaf indices must fit in one byte.
pub const MAX_SUPPORTED_DEPTH: u8 = 8;

/// Depth of heap node `t` (root = 0).
#[inline]
pub fn node_depth(t: usize) -> u32 {
    debug_assert!(t >= 1);
    usize::BITS - 1 - t.leading_zeros()
}

/// Length of the axis/cutpoint arrays for depth `d`.
#[inline]
pub fn split_len(max_depth: u8) -> usize {
    1usize << (max_depth - 1)
}

/// Length of the leaf value array for depth `d`.
#[inline]
pub fn heap_len(max_depth: u8) -> usize {
    1usize << max_depth
}

/// Per-tree footprint when every entry is stored with 32 bits.
pub fn tree_payload_bytes_32(max_depth: u8) -> usize {
    4 * (split_len(max_depth) + split_len(max_depth) + heap_len(max_depth))
}

fn check_depth(max_depth: u8) -> Result<(), Error> {
    if (1..=MAX_SUPPORTED_DEPTH).contains(&max_depth) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "maximum depth must be in 1..={MAX_SUPPORTED_DEPTH}, got {max_depth}"
        )))
    }
}

/// Borrowed view of one heap-encoded tree.
#[derive(Debug, Clone, Copy)]
pub struct TreeView<'a> {
    pub axis: &'a [u16],
    pub cutpoint: &'a [u8],
    pub leaf_value: &'a [f32],
    pub max_depth: u8,
}

impl<'a> TreeView<'a> {
    #[inline]
    pub fn is_internal(&self, t: usize) -> bool {
        t < self.cutpoint.len() && self.cutpoint[t] != 0
    }

    /// Whether `t` is part of the tree (root, or child of an internal node).
    pub fn is_reachable(&self, t: usize) -> bool {
        let mut t = t;
        if t == 0 || t >= heap_len(self.max_depth) {
            return false;
        }
        while t > 1 {
            t >>= 1;
            if !self.is_internal(t) {
                return false;
            }
        }
        true
    }

    #[inline]
    pub fn is_leaf(&self, t: usize) -> bool {
        !self.is_internal(t) && self.is_reachable(t)
    }

    /// Heap indices of all leaves, ascending.
    pub fn leaves(&self) -> Vec<usize> {
        (1..heap_len(self.max_depth))
            .filter(|&t| self.is_leaf(t))
            .collect()
    }

    pub fn n_leaves(&self) -> usize {
        1 + self.cutpoint.iter().skip(1).filter(|&&c| c != 0).count()
    }

    pub fn to_owned(&self) -> TreeHeap {
        TreeHeap {
            axis: self.axis.to_vec(),
            cutpoint: self.cutpoint.to_vec(),
            leaf_value: self.leaf_value.to_vec(),
            max_depth: self.max_depth,
        }
    }

    /// Branchless descent: always runs `D - 1` rounds and keeps the index
    /// frozen once a leaf has been hit. Values `>= split` go right.
    #[inline]
    pub fn traverse_by(&self, cell: impl Fn(usize) -> u8) -> usize {
        let mut index = 1usize;
        let mut leaf_found = false;
        for _ in 1..self.max_depth {
            let axis = self.axis[index] as usize;
            let split = self.cutpoint[index];
            leaf_found |= split == 0;
            let child = 2 * index + (cell(axis) >= split) as usize;
            index = if leaf_found { index } else { child };
        }
        index
    }

    /// Leaf reached by the point with grid cells `x`.
    #[inline]
    pub fn traverse(&self, x: &[u8]) -> usize {
        self.traverse_by(|a| x[a])
    }

    /// Leaf reached by row `i` of `x`.
    #[inline]
    pub fn traverse_point(&self, x: &QuantizedMatrix, i: usize) -> usize {
        self.traverse_by(|a| x.get(i, a))
    }

    /// Function value of the tree at row `i` of `x`.
    #[inline]
    pub fn predict_point(&self, x: &QuantizedMatrix, i: usize) -> f32 {
        self.leaf_value[self.traverse_point(x, i)]
    }
}

/// One owned heap-encoded tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeHeap {
    pub axis: Vec<u16>,
    pub cutpoint: Vec<u8>,
    pub leaf_value: Vec<f32>,
    pub max_depth: u8,
}

impl TreeHeap {
    /// Root-only tree whose single leaf holds `value`.
    pub fn root_only(max_depth: u8, value: f32) -> Result<Self, Error> {
        check_depth(max_depth)?;
        let mut leaf_value = vec![0.0; heap_len(max_depth)];
        leaf_value[1] = value;
        Ok(Self {
            axis: vec![0; split_len(max_depth)],
            cutpoint: vec![0; split_len(max_depth)],
            leaf_value,
            max_depth,
        })
    }

    pub fn view(&self) -> TreeView<'_> {
        TreeView {
            axis: &self.axis,
            cutpoint: &self.cutpoint,
            leaf_value: &self.leaf_value,
            max_depth: self.max_depth,
        }
    }

    pub fn traverse(&self, x: &[u8]) -> usize {
        self.view().traverse(x)
    }

    /// Turn leaf `t` into an internal node. Leaf values are not touched.
    pub fn split_leaf(&mut self, t: usize, axis: u16, cutpoint: u8) {
        assert!(t < self.cutpoint.len() && cutpoint != 0);
        self.axis[t] = axis;
        self.cutpoint[t] = cutpoint;
        self.leaf_value[t] = 0.0;
    }

    /// Checks every structural invariant, see [`validate`].
    pub fn validate(&self) -> Result<(), TreeViolation> {
        validate(&self.view())
    }
}

/// First invariant a tree was found to break.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeViolation {
    #[error("maximum depth {0} outside 1..=8")]
    BadDepth(u8),
    #[error("array {array} has length {got}, expected {expected}")]
    WrongLength {
        array: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("index 0 is reserved but holds data in {0}")]
    ReservedSlotUsed(&'static str),
    #[error("orphan internal node {0}: its parent is a leaf")]
    OrphanInternal(usize),
    #[error("unused entry {index} of {array} is nonzero")]
    UnusedEntryNonzero { array: &'static str, index: usize },
    #[error("node {node} splits on axis {axis} with cutpoint {cutpoint}, outside the grid")]
    OffGrid { node: usize, axis: u16, cutpoint: u8 },
}

/// Checks structural invariants of a heap tree and reports the first failure.
pub fn validate(tree: &TreeView<'_>) -> Result<(), TreeViolation> {
    let d = tree.max_depth;
    if !(1..=MAX_SUPPORTED_DEPTH).contains(&d) {
        return Err(TreeViolation::BadDepth(d));
    }
    let lens = [
        ("axis", tree.axis.len(), split_len(d)),
        ("cutpoint", tree.cutpoint.len(), split_len(d)),
        ("leaf_value", tree.leaf_value.len(), heap_len(d)),
    ];
    for (array, got, expected) in lens {
        if got != expected {
            return Err(TreeViolation::WrongLength {
                array,
                got,
                expected,
            });
        }
    }
    if tree.axis[0] != 0 {
        return Err(TreeViolation::ReservedSlotUsed("axis"));
    }
    if tree.cutpoint[0] != 0 {
        return Err(TreeViolation::ReservedSlotUsed("cutpoint"));
    }
    if tree.leaf_value[0] != 0.0 {
        return Err(TreeViolation::ReservedSlotUsed("leaf_value"));
    }
    for t in 2..split_len(d) {
        if tree.cutpoint[t] != 0 && tree.cutpoint[t >> 1] == 0 {
            return Err(TreeViolation::OrphanInternal(t));
        }
    }
    for t in 1..split_len(d) {
        if tree.cutpoint[t] == 0 && tree.axis[t] != 0 {
            return Err(TreeViolation::UnusedEntryNonzero {
                array: "axis",
                index: t,
            });
        }
    }
    for t in 1..heap_len(d) {
        if tree.leaf_value[t] != 0.0 && !tree.is_leaf(t) {
            return Err(TreeViolation::UnusedEntryNonzero {
                array: "leaf_value",
                index: t,
            });
        }
    }
    Ok(())
}

/// Like [`validate`], also checking that every split lies on the grid
/// described by `cuts_per_axis`.
pub fn validate_on_grid(tree: &TreeView<'_>, cuts_per_axis: &[u8]) -> Result<(), TreeViolation> {
    validate(tree)?;
    for t in 1..tree.cutpoint.len() {
        let c = tree.cutpoint[t];
        if c == 0 {
            continue;
        }
        let a = tree.axis[t];
        let ok = cuts_per_axis.get(a as usize).is_some_and(|&n| c <= n);
        if !ok {
            return Err(TreeViolation::OffGrid {
                node: t,
                axis: a,
                cutpoint: c,
            });
        }
    }
    Ok(())
}

/// `m` trees of equal depth stored as three row-major matrices, one row per
/// tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    max_depth: u8,
    n_trees: usize,
    axis: Vec<u16>,
    cutpoint: Vec<u8>,
    leaf_value: Vec<f32>,
}

impl Forest {
    /// `n_trees` root-only trees, each with leaf value `value`.
    pub fn root_only(n_trees: usize, max_depth: u8, value: f32) -> Result<Self, Error> {
        check_depth(max_depth)?;
        if n_trees == 0 {
            return Err(Error::Config("a forest needs at least one tree".into()));
        }
        let hl = heap_len(max_depth);
        let mut leaf_value = vec![0.0; n_trees * hl];
        for j in 0..n_trees {
            leaf_value[j * hl + 1] = value;
        }
        Ok(Self {
            max_depth,
            n_trees,
            axis: vec![0; n_trees * split_len(max_depth)],
            cutpoint: vec![0; n_trees * split_len(max_depth)],
            leaf_value,
        })
    }

    pub fn from_trees(trees: &[TreeHeap]) -> Result<Self, Error> {
        let first = trees
            .first()
            .ok_or_else(|| Error::Config("a forest needs at least one tree".into()))?;
        let d = first.max_depth;
        check_depth(d)?;
        let mut forest = Self::root_only(trees.len(), d, 0.0)?;
        for (j, t) in trees.iter().enumerate() {
            if t.max_depth != d {
                return Err(Error::Config("all trees in a forest share one depth".into()));
            }
            forest.set_tree(j, t);
        }
        Ok(forest)
    }

    pub(crate) fn from_raw(
        max_depth: u8,
        n_trees: usize,
        axis: Vec<u16>,
        cutpoint: Vec<u8>,
        leaf_value: Vec<f32>,
    ) -> Result<Self, Error> {
        check_depth(max_depth)?;
        if n_trees == 0
            || axis.len() != n_trees * split_len(max_depth)
            || cutpoint.len() != n_trees * split_len(max_depth)
            || leaf_value.len() != n_trees * heap_len(max_depth)
        {
            return Err(Error::Format("forest matrices have inconsistent sizes".into()));
        }
        Ok(Self {
            max_depth,
            n_trees,
            axis,
            cutpoint,
            leaf_value,
        })
    }

    pub fn max_depth(&self) -> u8 {
        self.max_depth
    }

    pub fn n_trees(&self) -> usize {
        self.n_trees
    }

    pub fn tree(&self, j: usize) -> TreeView<'_> {
        let sl = split_len(self.max_depth);
        let hl = heap_len(self.max_depth);
        TreeView {
            axis: &self.axis[j * sl..(j + 1) * sl],
            cutpoint: &self.cutpoint[j * sl..(j + 1) * sl],
            leaf_value: &self.leaf_value[j * hl..(j + 1) * hl],
            max_depth: self.max_depth,
        }
    }

    pub fn trees(&self) -> impl Iterator<Item = TreeView<'_>> + '_ {
        (0..self.n_trees).map(move |j| self.tree(j))
    }

    pub fn set_tree(&mut self, j: usize, tree: &TreeHeap) {
        assert_eq!(tree.max_depth, self.max_depth);
        let sl = split_len(self.max_depth);
        let hl = heap_len(self.max_depth);
        self.axis[j * sl..(j + 1) * sl].copy_from_slice(&tree.axis);
        self.cutpoint[j * sl..(j + 1) * sl].copy_from_slice(&tree.cutpoint);
        self.leaf_value[j * hl..(j + 1) * hl].copy_from_slice(&tree.leaf_value);
    }

    pub(crate) fn tree_mut(&mut self, j: usize) -> (&mut [u16], &mut [u8], &mut [f32]) {
        let sl = split_len(self.max_depth);
        let hl = heap_len(self.max_depth);
        (
            &mut self.axis[j * sl..(j + 1) * sl],
            &mut self.cutpoint[j * sl..(j + 1) * sl],
            &mut self.leaf_value[j * hl..(j + 1) * hl],
        )
    }

    pub fn axis_matrix(&self) -> &[u16] {
        &self.axis
    }

    pub fn cutpoint_matrix(&self) -> &[u8] {
        &self.cutpoint
    }

    pub fn leaf_matrix(&self) -> &[f32] {
        &self.leaf_value
    }

    /// Mean leaf count per tree.
    pub fn mean_leaves(&self) -> f64 {
        self.trees().map(|t| t.n_leaves() as f64).sum::<f64>() / self.n_trees as f64
    }

    pub fn validate(&self) -> Result<(), (usize, TreeViolation)> {
        for (j, t) in self.trees().enumerate() {
            validate(&t).map_err(|v| (j, v))?;
        }
        Ok(())
    }
}

/// `n x m` matrix of leaf heap indices, one byte per entry.
///
/// Stored tree-major: all `n` indices of tree 0, then tree 1, and so on, so
/// that per-tree passes touch contiguous memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafIndexMatrix {
    n: usize,
    m: usize,
    data: Vec<u8>,
}

impl LeafIndexMatrix {
    pub fn filled(n: usize, m: usize, value: u8) -> Self {
        Self {
            n,
            m,
            data: vec![value; n * m],
        }
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn n_trees(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[j * self.n + i]
    }

    pub fn column(&self, j: usize) -> &[u8] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [u8] {
        &mut self.data[j * self.n..(j + 1) * self.n]
    }

    pub(crate) fn columns_mut(&mut self) -> impl IndexedParallelIterator<Item = &mut [u8]> {
        self.data.par_chunks_mut(self.n.max(1))
    }

    pub fn payload_bytes(&self) -> usize {
        self.data.len()
    }
}

/// Leaf index of every point in every tree.
pub fn traverse_forest(forest: &Forest, x: &QuantizedMatrix) -> LeafIndexMatrix {
    let n = x.n_rows();
    let mut out = LeafIndexMatrix::filled(n, forest.n_trees(), 1);
    if n == 0 {
        return out;
    }
    out.columns_mut().enumerate().for_each(|(j, col)| {
        let tree = forest.tree(j);
        for (i, slot) in col.iter_mut().enumerate() {
            *slot = tree.traverse_point(x, i) as u8;
        }
    });
    out
}

/// Sum of all trees at every row of `x`, accumulated in tree order.
pub fn evaluate_forest(forest: &Forest, x: &QuantizedMatrix) -> Vec<f64> {
    (0..x.n_rows())
        .into_par_iter()
        .map(|i| forest.trees().map(|t| t.predict_point(x, i) as f64).sum())
        .collect()
}
