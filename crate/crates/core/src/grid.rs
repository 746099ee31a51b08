//! Splitting grids and byte-quantized predictor matrices.
//!
//! Each axis gets a sorted list of real cutpoints `S[1..=k]` (at most 255).
//! A raw value is replaced by the number of cutpoints `<= value`, so the
//! index-space test `index >= c` is equivalent to the real-space test
//! `value >= S[c]`. Cutpoint index 0 is free to mean "leaf" in trees.

use std::sync::Arc;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::Error;

/// Largest number of cutpoints per axis; grid indices fit in a byte.
pub const MAX_CUTPOINTS: usize = 255;

/// Most axes a tree can address with its 16-bit axis entries.
pub const MAX_AXES: usize = u16::MAX as usize + 1;

/// How the splitting grid is derived from training data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridScheme {
    /// `k` equally spaced interior cutpoints per axis.
    Uniform(u8),
    /// Midpoints between consecutive distinct observed values.
    Midpoints,
}

impl Default for GridScheme {
    fn default() -> Self {
        GridScheme::Uniform(100)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutpointGrid {
    cuts: Vec<Vec<f64>>,
}

impl CutpointGrid {
    /// Builds a grid from explicit per-axis cutpoints.
    pub fn from_cutpoints(cuts: Vec<Vec<f64>>) -> Result<Self, Error> {
        if cuts.len() > MAX_AXES {
            return Err(Error::Config(format!(
                "{} axes, at most {MAX_AXES} allowed",
                cuts.len()
            )));
        }
        for (a, c) in cuts.iter().enumerate() {
            if c.len() > MAX_CUTPOINTS {
                return Err(Error::Config(format!(
                    "axis {a} has {} cutpoints, at most {MAX_CUTPOINTS} allowed",
                    c.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) || c.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Config(format!(
                    "axis {a} cutpoints must be finite and strictly increasing"
                )));
            }
        }
        Ok(Self { cuts })
    }

    pub fn build(x: ArrayView2<'_, f64>, scheme: GridScheme) -> Result<Self, Error> {
        match scheme {
            GridScheme::Uniform(k) => build_grid_uniform(x, k as usize),
            GridScheme::Midpoints => build_grid_midpoints(x),
        }
    }

    pub fn n_axes(&self) -> usize {
        self.cuts.len()
    }

    pub fn cutpoints(&self, axis: usize) -> &[f64] {
        &self.cuts[axis]
    }

    /// Number of cutpoints on each axis.
    pub fn cuts_per_axis(&self) -> Vec<u8> {
        self.cuts.iter().map(|c| c.len() as u8).collect()
    }

    /// Axes with no cutpoint; they can never be split on.
    pub fn degenerate_axes(&self) -> Vec<usize> {
        (0..self.cuts.len())
            .filter(|&a| self.cuts[a].is_empty())
            .collect()
    }

    pub fn is_degenerate(&self) -> bool {
        self.cuts.iter().all(|c| c.is_empty())
    }

    /// Real cutpoint behind grid index `c >= 1` on `axis`.
    pub fn split_value(&self, axis: usize, c: u8) -> f64 {
        self.cuts[axis][c as usize - 1]
    }

    /// Grid cell of `value` on `axis`: how many cutpoints are `<= value`.
    #[inline]
    pub fn cell(&self, axis: usize, value: f64) -> u8 {
        self.cuts[axis].partition_point(|&s| s <= value) as u8
    }
}

fn column_extent(x: ArrayView2<'_, f64>, axis: usize) -> Result<(f64, f64), Error> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in x.column(axis) {
        if !v.is_finite() {
            return Err(Error::Data(format!("non-finite predictor value on axis {axis}")));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// `k` equally spaced cutpoints per axis strictly inside the observed range.
/// Constant axes get no cutpoints.
pub fn build_grid_uniform(x: ArrayView2<'_, f64>, k: usize) -> Result<CutpointGrid, Error> {
    if x.nrows() < 2 {
        return Err(Error::Data("need at least 2 rows to build a grid".into()));
    }
    if !(1..=MAX_CUTPOINTS).contains(&k) {
        return Err(Error::Config(format!(
            "cutpoints per axis must be in 1..={MAX_CUTPOINTS}, got {k}"
        )));
    }
    let mut cuts = Vec::with_capacity(x.ncols());
    for a in 0..x.ncols() {
        let (lo, hi) = column_extent(x, a)?;
        cuts.push(uniform_cutpoints(lo, hi, k));
    }
    CutpointGrid::from_cutpoints(cuts)
}

/// `k` equally spaced cutpoints strictly inside `[lo, hi]`; none when the
/// interval is a single point.
pub fn uniform_cutpoints(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if lo == hi {
        return Vec::new();
    }
    let step = (hi - lo) / (k as f64 + 1.0);
    let mut cuts: Vec<f64> = (1..=k).map(|i| lo + step * i as f64).collect();
    cuts.dedup();
    cuts
}

/// Cutpoints halfway between consecutive distinct observed values. Axes with
/// more than 255 midpoints keep 255 of them at evenly spaced ranks.
pub fn build_grid_midpoints(x: ArrayView2<'_, f64>) -> Result<CutpointGrid, Error> {
    if x.nrows() < 2 {
        return Err(Error::Data("need at least 2 rows to build a grid".into()));
    }
    let mut cuts = Vec::with_capacity(x.ncols());
    for a in 0..x.ncols() {
        column_extent(x, a)?;
        let mut values: Vec<f64> = x.column(a).to_vec();
        values.sort_by(f64::total_cmp);
        values.dedup();
        let mut mids: Vec<f64> = values.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0).collect();
        mids.dedup();
        cuts.push(subsample_ranks(mids, MAX_CUTPOINTS));
    }
    CutpointGrid::from_cutpoints(cuts)
}

/// Keeps `keep` entries at evenly spaced ranks, always including both ends.
fn subsample_ranks(values: Vec<f64>, keep: usize) -> Vec<f64> {
    let len = values.len();
    if len <= keep {
        return values;
    }
    (0..keep)
        .map(|i| {
            let rank = (i as f64 * (len - 1) as f64 / (keep - 1) as f64).round() as usize;
            values[rank]
        })
        .collect()
}

/// `n x p` byte matrix of grid cells plus the grid that produced it.
///
/// Stored axis-major (all `n` cells of axis 0, then axis 1, ...) so a pass
/// over one predictor for every point reads contiguous memory.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedMatrix {
    n: usize,
    p: usize,
    data: Vec<u8>,
    grid: Arc<CutpointGrid>,
}

impl QuantizedMatrix {
    /// Wraps precomputed row-major grid indices. Every entry must be a valid
    /// cell.
    pub fn from_indices(
        n: usize,
        p: usize,
        data: Vec<u8>,
        grid: Arc<CutpointGrid>,
    ) -> Result<Self, Error> {
        if data.len() != n * p || grid.n_axes() != p {
            return Err(Error::Shape(format!(
                "index matrix of {} entries does not match {n}x{p} with a {}-axis grid",
                data.len(),
                grid.n_axes()
            )));
        }
        let caps = grid.cuts_per_axis();
        if data
            .chunks(p.max(1))
            .any(|row| row.iter().zip(&caps).any(|(v, c)| v > c))
        {
            return Err(Error::Data("grid index beyond the number of cutpoints".into()));
        }
        let mut by_axis = vec![0u8; n * p];
        for i in 0..n {
            for a in 0..p {
                by_axis[a * n + i] = data[i * p + a];
            }
        }
        Ok(Self {
            n,
            p,
            data: by_axis,
            grid,
        })
    }

    /// Wraps axis-major grid indices: all `n` cells of axis 0 first.
    pub fn from_columns(n: usize, data: Vec<u8>, grid: Arc<CutpointGrid>) -> Result<Self, Error> {
        let p = grid.n_axes();
        if data.len() != n * p {
            return Err(Error::Shape(format!(
                "{} cells do not fill {n} rows of a {p}-axis grid",
                data.len()
            )));
        }
        let caps = grid.cuts_per_axis();
        if (0..p).any(|a| data[a * n..(a + 1) * n].iter().any(|&v| v > caps[a])) {
            return Err(Error::Data("grid index beyond the number of cutpoints".into()));
        }
        Ok(Self { n, p, data, grid })
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.p
    }

    /// Cells of point `i`, one per axis.
    pub fn row(&self, i: usize) -> Vec<u8> {
        (0..self.p).map(|a| self.get(i, a)).collect()
    }

    #[inline]
    pub fn get(&self, i: usize, axis: usize) -> u8 {
        self.data[axis * self.n + i]
    }

    /// Cells of every point on `axis`.
    #[inline]
    pub fn column(&self, axis: usize) -> &[u8] {
        &self.data[axis * self.n..(axis + 1) * self.n]
    }

    pub fn grid(&self) -> &Arc<CutpointGrid> {
        &self.grid
    }

    /// Raw axis-major storage.
    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    /// Bytes held by the index matrix itself, `n * p`.
    pub fn payload_bytes(&self) -> usize {
        self.data.len()
    }
}

/// Replaces every raw value by its grid cell. Values outside the training
/// range land in the first or last cell.
pub fn quantize(x: ArrayView2<'_, f64>, grid: &Arc<CutpointGrid>) -> Result<QuantizedMatrix, Error> {
    let (n, p) = x.dim();
    if p != grid.n_axes() {
        return Err(Error::Shape(format!(
            "data has {p} predictors but the grid has {}",
            grid.n_axes()
        )));
    }
    let mut data = Vec::with_capacity(n * p);
    for (a, column) in x.columns().into_iter().enumerate() {
        data.extend(column.iter().map(|&v| grid.cell(a, v)));
    }
    Ok(QuantizedMatrix {
        n,
        p,
        data,
        grid: Arc::clone(grid),
    })
}
