//! Binary containers for forests and traces. All integers and floats are
//! little-endian.
//!
//! # Forest container
//!
//! | field            | type                      | count                  |
//! |------------------|---------------------------|------------------------|
//! | magic            | bytes `"BFORGE1\0"`       | 8                      |
//! | D                | u32                       | 1                      |
//! | m                | u32                       | 1                      |
//! | p                | u32                       | 1                      |
//! | grid             | per axis: u32 `k`, `k` f64 cutpoints | p           |
//! | axis matrix      | u32                       | `m * 2^(D-1)`          |
//! | cutpoint matrix  | u32                       | `m * 2^(D-1)`          |
//! | leaf matrix      | f32                       | `m * 2^D`              |
//!
//! Matrices are row-major with one row per tree; row `j` holds the heap
//! arrays of tree `j` including the unused slot 0.
//!
//! # Trace container
//!
//! | field            | type                                   |
//! |------------------|----------------------------------------|
//! | magic            | bytes `"BTRACE1\0"`                    |
//! | version          | u32, currently 1                       |
//! | header length    | u32                                    |
//! | header           | UTF-8 JSON, see [`TraceHeader`]        |
//! | scaling          | f64 `min`, f64 `range`                 |
//! | grid             | as in the forest container             |
//! | chains           | `n_chains` chain blocks                |
//!
//! Each chain block holds, in order, with `S` kept draws and `I` iterations:
//! `S` f64 sigma draws, `S * n_train` f64 training values, `S * n_test` f64
//! test values, `I * m` u8 acceptance flags, `I` f64 mean leaf counts and,
//! when `has_forests` is set, `S` forests as the three matrices of the forest
//! container (no header, no grid).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::grid::CutpointGrid;
use crate::interface::{ChainTrace, FitConfig, Scaling, Trace};
use crate::sampler::Hyperparams;
use crate::tree::{heap_len, split_len, validate_on_grid, Forest, MAX_SUPPORTED_DEPTH};
use crate::Error;

pub const FOREST_MAGIC: &[u8; 8] = b"BFORGE1\0";
pub const TRACE_MAGIC: &[u8; 8] = b"BTRACE1\0";
pub const TRACE_VERSION: u32 = 1;

/// JSON header of the trace container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub config: FitConfig,
    pub hyperparams: Hyperparams,
    pub n_train: usize,
    pub n_test: usize,
    pub n_chains: usize,
    pub n_kept: usize,
    pub n_iterations: usize,
    pub n_trees: usize,
    pub max_depth: u8,
    pub n_axes: usize,
    pub has_forests: bool,
}

fn put_u32<W: Write>(w: &mut W, v: usize) -> Result<(), Error> {
    let v = u32::try_from(v).map_err(|_| Error::Format(format!("{v} does not fit in 32 bits")))?;
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn put_f64s<W: Write>(w: &mut W, v: &[f64]) -> Result<(), Error> {
    for x in v {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn get_u32<R: Read>(r: &mut R) -> Result<u32, Error> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn get_f64<R: Read>(r: &mut R) -> Result<f64, Error> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn get_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>, Error> {
    (0..n).map(|_| get_f64(r)).collect()
}

fn get_bytes<R: Read>(r: &mut R, n: usize) -> Result<Vec<u8>, Error> {
    let mut v = Vec::new();
    r.take(n as u64).read_to_end(&mut v)?;
    if v.len() != n {
        return Err(Error::Format("truncated container".into()));
    }
    Ok(v)
}

fn check_magic<R: Read>(r: &mut R, magic: &[u8; 8]) -> Result<(), Error> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    if &b != magic {
        return Err(Error::Format("bad magic".into()));
    }
    Ok(())
}

fn write_grid<W: Write>(w: &mut W, grid: &CutpointGrid) -> Result<(), Error> {
    for a in 0..grid.n_axes() {
        put_u32(w, grid.cutpoints(a).len())?;
        put_f64s(w, grid.cutpoints(a))?;
    }
    Ok(())
}

fn read_grid<R: Read>(r: &mut R, p: usize) -> Result<CutpointGrid, Error> {
    let mut cuts = Vec::with_capacity(p);
    for _ in 0..p {
        let k = get_u32(r)? as usize;
        if k > crate::grid::MAX_CUTPOINTS {
            return Err(Error::Format(format!("{k} cutpoints on one axis")));
        }
        cuts.push(get_f64s(r, k)?);
    }
    CutpointGrid::from_cutpoints(cuts).map_err(|e| Error::Format(e.to_string()))
}

fn write_matrices<W: Write>(w: &mut W, forest: &Forest) -> Result<(), Error> {
    let mut buf = Vec::with_capacity(4 * forest.leaf_matrix().len());
    for &a in forest.axis_matrix() {
        buf.extend_from_slice(&(a as u32).to_le_bytes());
    }
    for &c in forest.cutpoint_matrix() {
        buf.extend_from_slice(&(c as u32).to_le_bytes());
    }
    for &v in forest.leaf_matrix() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_matrices<R: Read>(r: &mut R, d: u8, m: usize, grid: &CutpointGrid) -> Result<Forest, Error> {
    let sl = m * split_len(d);
    let hl = m * heap_len(d);
    let raw = get_bytes(r, 4 * (2 * sl + hl))?;
    let words: Vec<[u8; 4]> = raw.chunks_exact(4).map(|c| c.try_into().unwrap()).collect();
    let narrow = |w: &[u8; 4], max: u32, what: &str| {
        let v = u32::from_le_bytes(*w);
        if v > max {
            Err(Error::Format(format!("{what} entry {v} out of range")))
        } else {
            Ok(v)
        }
    };
    let axis = words[..sl]
        .iter()
        .map(|w| narrow(w, u16::MAX as u32, "axis").map(|v| v as u16))
        .collect::<Result<Vec<_>, _>>()?;
    let cut = words[sl..2 * sl]
        .iter()
        .map(|w| narrow(w, u8::MAX as u32, "cutpoint").map(|v| v as u8))
        .collect::<Result<Vec<_>, _>>()?;
    let leaf = words[2 * sl..].iter().map(|w| f32::from_le_bytes(*w)).collect();
    let forest = Forest::from_raw(d, m, axis, cut, leaf)?;
    let caps = grid.cuts_per_axis();
    for (j, t) in forest.trees().enumerate() {
        validate_on_grid(&t, &caps).map_err(|v| Error::Format(format!("tree {j}: {v}")))?;
    }
    Ok(forest)
}

fn read_shape<R: Read>(r: &mut R) -> Result<(u8, usize, usize), Error> {
    let d = get_u32(r)?;
    let m = get_u32(r)? as usize;
    let p = get_u32(r)? as usize;
    if d == 0 || d > MAX_SUPPORTED_DEPTH as u32 || m == 0 {
        return Err(Error::Format(format!("unsupported shape D={d}, m={m}")));
    }
    Ok((d as u8, m, p))
}

pub fn write_forest<W: Write>(w: &mut W, forest: &Forest, grid: &CutpointGrid) -> Result<(), Error> {
    w.write_all(FOREST_MAGIC)?;
    put_u32(w, forest.max_depth() as usize)?;
    put_u32(w, forest.n_trees())?;
    put_u32(w, grid.n_axes())?;
    write_grid(w, grid)?;
    write_matrices(w, forest)
}

pub fn read_forest<R: Read>(r: &mut R) -> Result<(Forest, CutpointGrid), Error> {
    check_magic(r, FOREST_MAGIC)?;
    let (d, m, p) = read_shape(r)?;
    let grid = read_grid(r, p)?;
    let forest = read_matrices(r, d, m, &grid)?;
    Ok((forest, grid))
}

/// Serialized size of a forest container.
pub fn forest_container_bytes(forest: &Forest, grid: &CutpointGrid) -> usize {
    let grid_bytes: usize = (0..grid.n_axes()).map(|a| 4 + 8 * grid.cutpoints(a).len()).sum();
    8 + 12 + grid_bytes + 4 * (forest.axis_matrix().len() + forest.cutpoint_matrix().len() + forest.leaf_matrix().len())
}

pub fn write_trace<W: Write>(w: &mut W, trace: &Trace) -> Result<(), Error> {
    let has_forests = trace.has_forests();
    let header = TraceHeader {
        config: trace.config.clone(),
        hyperparams: trace.hyperparams.clone(),
        n_train: trace.n_train,
        n_test: trace.n_test,
        n_chains: trace.chains.len(),
        n_kept: trace.config.n_kept,
        n_iterations: trace.config.n_iterations(),
        n_trees: trace.config.n_trees,
        max_depth: trace.config.max_depth,
        n_axes: trace.grid.n_axes(),
        has_forests,
    };
    let json = serde_json::to_vec(&header).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(TRACE_MAGIC)?;
    put_u32(w, TRACE_VERSION as usize)?;
    put_u32(w, json.len())?;
    w.write_all(&json)?;
    put_f64s(w, &[trace.scaling.min, trace.scaling.range])?;
    write_grid(w, &trace.grid)?;
    for c in &trace.chains {
        put_f64s(w, &c.sigma)?;
        put_f64s(w, &c.train)?;
        put_f64s(w, &c.test)?;
        w.write_all(&c.accepted)?;
        put_f64s(w, &c.mean_leaves)?;
        if has_forests {
            for f in &c.forests {
                write_matrices(w, f)?;
            }
        }
    }
    Ok(())
}

pub fn read_trace<R: Read>(r: &mut R) -> Result<Trace, Error> {
    check_magic(r, TRACE_MAGIC)?;
    let version = get_u32(r)?;
    if version != TRACE_VERSION {
        return Err(Error::Format(format!("unsupported trace version {version}")));
    }
    let len = get_u32(r)? as usize;
    let json = get_bytes(r, len)?;
    let h: TraceHeader = serde_json::from_slice(&json).map_err(|e| Error::Format(e.to_string()))?;
    if h.n_kept != h.config.n_kept
        || h.n_iterations != h.config.n_iterations()
        || h.n_trees != h.config.n_trees
        || h.max_depth != h.config.max_depth
    {
        return Err(Error::Format("trace header disagrees with its configuration".into()));
    }
    let scaling = Scaling {
        min: get_f64(r)?,
        range: get_f64(r)?,
    };
    let grid = read_grid(r, h.n_axes)?;
    let (s, iters, m) = (h.n_kept, h.n_iterations, h.n_trees);
    let mut chains = Vec::with_capacity(h.n_chains);
    for _ in 0..h.n_chains {
        let mut c = ChainTrace {
            sigma: get_f64s(r, s)?,
            train: get_f64s(r, s * h.n_train)?,
            test: get_f64s(r, s * h.n_test)?,
            accepted: get_bytes(r, iters * m)?,
            mean_leaves: Vec::new(),
            forests: Vec::new(),
        };
        c.mean_leaves = get_f64s(r, iters)?;
        if h.has_forests {
            for _ in 0..s {
                c.forests.push(read_matrices(r, h.max_depth, m, &grid)?);
            }
        }
        chains.push(c);
    }
    Ok(Trace {
        config: h.config,
        hyperparams: h.hyperparams,
        scaling,
        grid: Arc::new(grid),
        n_train: h.n_train,
        n_test: h.n_test,
        chains,
    })
}

pub fn save_forest(path: &Path, forest: &Forest, grid: &CutpointGrid) -> Result<(), Error> {
    let mut w = BufWriter::new(File::create(path)?);
    write_forest(&mut w, forest, grid)?;
    w.flush()?;
    Ok(())
}

pub fn load_forest(path: &Path) -> Result<(Forest, CutpointGrid), Error> {
    read_forest(&mut BufReader::new(File::open(path)?))
}

pub fn save_trace(path: &Path, trace: &Trace) -> Result<(), Error> {
    let mut w = BufWriter::new(File::create(path)?);
    write_trace(&mut w, trace)?;
    w.flush()?;
    Ok(())
}

pub fn load_trace(path: &Path) -> Result<Trace, Error> {
    read_trace(&mut BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::TreeHeap;
    use ndarray::Array2;

    fn small() -> (Forest, CutpointGrid) {
        let grid = CutpointGrid::from_cutpoints(vec![vec![0.5], vec![0.25, 0.75]]).unwrap();
        let mut t = TreeHeap::root_only(2, 0.0).unwrap();
        t.split_leaf(1, 1, 2);
        t.leaf_value[2] = -1.5;
        t.leaf_value[3] = 2.0;
        let u = TreeHeap::root_only(2, 0.25).unwrap();
        (Forest::from_trees(&[t, u]).unwrap(), grid)
    }

    #[test]
    fn forest_bytes_follow_documented_layout() {
        let (forest, grid) = small();
        let mut buf = Vec::new();
        write_forest(&mut buf, &forest, &grid).unwrap();
        assert_eq!(buf.len(), forest_container_bytes(&forest, &grid));
        let mut expect = Vec::new();
        expect.extend_from_slice(b"BFORGE1\0");
        for v in [2u32, 2, 2, 1] {
            expect.extend_from_slice(&v.to_le_bytes());
        }
        expect.extend_from_slice(&0.5f64.to_le_bytes());
        expect.extend_from_slice(&2u32.to_le_bytes());
        expect.extend_from_slice(&0.25f64.to_le_bytes());
        expect.extend_from_slice(&0.75f64.to_le_bytes());
        for v in [0u32, 1, 0, 0, 0, 2, 0, 0] {
            expect.extend_from_slice(&v.to_le_bytes());
        }
        for v in [0.0f32, 0.0, -1.5, 2.0, 0.0, 0.25, 0.0, 0.0] {
            expect.extend_from_slice(&v.to_le_bytes());
        }
        assert_eq!(buf, expect);
    }

    #[test]
    fn forest_round_trip() {
        let (forest, grid) = small();
        let mut buf = Vec::new();
        write_forest(&mut buf, &forest, &grid).unwrap();
        let (f, g) = read_forest(&mut &buf[..]).unwrap();
        assert_eq!((f, g), (forest, grid));
    }

    #[test]
    fn corrupt_forests_are_rejected() {
        let (forest, grid) = small();
        let mut buf = Vec::new();
        write_forest(&mut buf, &forest, &grid).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_forest(&mut &bad[..]), Err(Error::Format(_))));
        assert!(read_forest(&mut &buf[..buf.len() - 1]).is_err());
        // Cutpoint 2 on axis 0, which has a single cutpoint.
        let mut off = buf.clone();
        let axis_at = buf.len() - 4 * 16 + 4;
        off[axis_at..axis_at + 4].copy_from_slice(&0u32.to_le_bytes());
        assert!(matches!(read_forest(&mut &off[..]), Err(Error::Format(_))));
    }

    #[test]
    fn trace_round_trip() {
        let x = Array2::from_shape_fn((25, 2), |(i, j)| ((i * 7 + j * 3) % 11) as f64);
        let y: Vec<f64> = (0..25).map(|i| (i as f64 * 0.37).sin()).collect();
        let cfg = FitConfig {
            n_trees: 5,
            n_burn: 5,
            n_kept: 7,
            max_depth: 3,
            ..Default::default()
        };
        let xt = x.slice(ndarray::s![..4, ..]);
        for keep in [true, false] {
            let cfg = FitConfig { keep_forests: keep, ..cfg.clone() };
            let trace = crate::interface::fit(x.view(), &y, Some(xt), &cfg).unwrap();
            let mut buf = Vec::new();
            write_trace(&mut buf, &trace).unwrap();
            assert_eq!(read_trace(&mut &buf[..]).unwrap(), trace);
        }
    }
}
