//! Timing and accuracy benchmarks over a grid of problem sizes.
//!
//! Four size plans scale `p` and `m` with `n`: `low` keeps `p = 100`,
//! `m = 200`; the `high` variants use `p = n / 10` and/or `m = n / 8`.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dgp::{gen_easy, gen_quadratic, gen_timing, DgpKind, Simulated};
use crate::grid::{uniform_cutpoints, CutpointGrid, GridScheme, QuantizedMatrix};
use crate::interface::{derive_hyperparams, diagnostics, fit, FitConfig};
use crate::rng::ChainKey;
use crate::sampler::{SamplerState, WorkCounters};
use crate::tree::tree_payload_bytes_32;
use crate::Error;

/// Test-set size of the accuracy benchmark.
pub const RMSE_TEST_SIZE: usize = 1000;

/// `n`-length 32-bit arrays a chain keeps: responses and residuals.
pub const WORD_ARRAYS_PER_POINT: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanKind {
    Low,
    HighP,
    HighTrees,
    HighBoth,
}

impl PlanKind {
    /// `(p, m)` for a training size `n`.
    pub fn shape(self, n: usize) -> (usize, usize) {
        let high_p = (n / 10).max(1);
        let high_m = (n / 8).max(1);
        match self {
            PlanKind::Low => (100, 200),
            PlanKind::HighP => (high_p, 200),
            PlanKind::HighTrees => (100, high_m),
            PlanKind::HighBoth => (high_p, high_m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchCell {
    pub n: usize,
    pub p: usize,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchPlan {
    pub cells: Vec<BenchCell>,
    pub repetitions: usize,
    pub warmup: usize,
    pub measured: usize,
    pub max_depth: u8,
    pub cutpoints: u8,
}

impl BenchPlan {
    pub fn new(kind: PlanKind, sizes: &[usize]) -> Self {
        let mut cells: Vec<BenchCell> = sizes
            .iter()
            .map(|&n| {
                let (p, m) = kind.shape(n);
                BenchCell { n, p, m }
            })
            .collect();
        cells.sort_by_key(|c| c.n);
        Self::from_cells(cells)
    }

    pub fn from_cells(cells: Vec<BenchCell>) -> Self {
        Self {
            cells,
            repetitions: 1,
            warmup: 3,
            measured: 10,
            max_depth: 6,
            cutpoints: 100,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.warmup < 1 || self.measured < 1 || self.repetitions < 1 {
            return Err(Error::Config("warmup, measured iterations and repetitions must be >= 1".into()));
        }
        if self.cells.windows(2).any(|w| w[0].n > w[1].n) {
            return Err(Error::Config("plan cells must be sorted by n".into()));
        }
        if self.cells.iter().any(|c| c.n < 2 || c.p < 1 || c.m < 1) {
            return Err(Error::Config("every cell needs n >= 2, p >= 1, m >= 1".into()));
        }
        if self.cutpoints == 0 {
            return Err(Error::Config("at least one cutpoint per axis".into()));
        }
        Ok(())
    }
}

/// Bytes held by the predictor and leaf-index byte matrices.
pub fn byte_matrix_bytes(n: usize, p: usize, m: usize) -> usize {
    n * (p + m)
}

/// Memory estimate of one timing cell: byte matrices, 32-bit per-point
/// arrays and the forest.
pub fn estimate_bytes(cell: BenchCell, max_depth: u8) -> usize {
    byte_matrix_bytes(cell.n, cell.p, cell.m)
        + 4 * cell.n * WORD_ARRAYS_PER_POINT
        + cell.m * tree_payload_bytes_32(max_depth)
}

/// Timing data quantized on a uniform grid, built column by column without
/// materializing the real-valued matrix.
pub fn timing_problem(n: usize, p: usize, cutpoints: u8) -> Result<(QuantizedMatrix, Vec<f64>), Error> {
    let (_, y) = gen_timing(n, 1)?;
    let value = |r: usize, c: usize| ((r + 1 + (p + 1) * (c + 1)) % 256) as f64;
    let mut cuts = Vec::with_capacity(p);
    for c in 0..p {
        let (lo, hi) = (0..n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            let v = value(r, c);
            (lo.min(v), hi.max(v))
        });
        cuts.push(uniform_cutpoints(lo, hi, cutpoints as usize));
    }
    let grid = Arc::new(CutpointGrid::from_cutpoints(cuts)?);
    let mut data = Vec::with_capacity(n * p);
    for c in 0..p {
        data.extend((0..n).map(|r| grid.cell(c, value(r, c))));
    }
    Ok((QuantizedMatrix::from_columns(n, data, grid)?, y))
}

/// One row of the timing report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeRow {
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub seconds_per_iteration: f64,
    pub bytes_estimated: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeResult {
    pub rows: Vec<TimeRow>,
    /// Work counted over the measured iterations of each row.
    pub work: Vec<WorkCounters>,
    pub skipped: Vec<(BenchCell, String)>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        (v[k / 2 - 1] + v[k / 2]) / 2.0
    }
}

/// Median wall-clock seconds per sampler iteration on the timing data, after
/// warmup. Cells whose estimate exceeds `budget_bytes` are skipped.
pub fn bench_time(plan: &BenchPlan, budget_bytes: usize, seed: u64) -> Result<TimeResult, Error> {
    plan.validate()?;
    let mut out = TimeResult {
        rows: Vec::new(),
        work: Vec::new(),
        skipped: Vec::new(),
    };
    for &cell in &plan.cells {
        let bytes = estimate_bytes(cell, plan.max_depth);
        if bytes > budget_bytes {
            out.skipped.push((cell, format!("estimated {bytes} bytes exceeds budget {budget_bytes}")));
            continue;
        }
        let (x, y) = timing_problem(cell.n, cell.p, plan.cutpoints)?;
        let config = FitConfig {
            n_trees: cell.m,
            max_depth: plan.max_depth,
            ..FitConfig::default()
        };
        let cal = derive_hyperparams(&y, &config)?;
        let y_scaled: Vec<f32> = y.iter().map(|&v| cal.scaling.to_scaled(v) as f32).collect();
        let x = Arc::new(x);
        let mut times = Vec::with_capacity(plan.repetitions * plan.measured);
        let mut work = WorkCounters::default();
        for rep in 0..plan.repetitions {
            let mut state = SamplerState::new(
                Arc::clone(&x),
                y_scaled.clone(),
                cal.hyperparams.clone(),
                cal.response_sd,
                ChainKey::new(seed, rep as u64),
            )?;
            for _ in 0..plan.warmup {
                state.step();
            }
            let before = state.counters();
            for _ in 0..plan.measured {
                let start = Instant::now();
                state.step();
                times.push(start.elapsed().as_secs_f64());
            }
            let after = state.counters();
            work = counters_between(before, after);
        }
        out.rows.push(TimeRow {
            n: cell.n,
            p: cell.p,
            m: cell.m,
            seconds_per_iteration: median(times),
            bytes_estimated: bytes,
        });
        out.work.push(work);
    }
    Ok(out)
}

fn counters_between(a: WorkCounters, b: WorkCounters) -> WorkCounters {
    WorkCounters {
        iterations: b.iterations - a.iterations,
        proposals: b.proposals - a.proposals,
        index_updates: b.index_updates - a.index_updates,
        count_reductions: b.count_reductions - a.count_reductions,
        sum_reductions: b.sum_reductions - a.sum_reductions,
        residual_updates: b.residual_updates - a.residual_updates,
        normal_draws: b.normal_draws - a.normal_draws,
        leaf_updates: b.leaf_updates - a.leaf_updates,
    }
}

/// One row of the accuracy report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseRow {
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub dgp: DgpKind,
    pub train_rmse: f64,
    pub test_rmse: f64,
    pub acceptance_rate: f64,
    pub mean_leaves_per_tree: f64,
}

/// Root mean square difference.
pub fn rmse(a: &[f64], b: &[f64]) -> f64 {
    let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (s / a.len() as f64).sqrt()
}

/// Training data of size `n` and a test set of [`RMSE_TEST_SIZE`] rows.
pub fn rmse_problem(dgp: DgpKind, n: usize, p: usize, seed: u64) -> Result<(Simulated, Simulated), Error> {
    match dgp {
        DgpKind::Easy => Ok(gen_easy(n + RMSE_TEST_SIZE, p, seed)?.split(n)),
        DgpKind::Quadratic => gen_quadratic(n, RMSE_TEST_SIZE, p, seed),
        DgpKind::Timing => {
            let (x, y) = gen_timing(n + RMSE_TEST_SIZE, p)?;
            Ok(Simulated { x, f: y.clone(), y }.split(n))
        }
    }
}

/// Posterior-mean RMSE against the observed responses on the training and
/// test sets, for every cell and process.
pub fn bench_rmse(plan: &BenchPlan, dgps: &[DgpKind], base: &FitConfig) -> Result<Vec<RmseRow>, Error> {
    plan.validate()?;
    let mut rows = Vec::new();
    for &cell in &plan.cells {
        for &dgp in dgps {
            let (train, test) = rmse_problem(dgp, cell.n, cell.p, base.seed)?;
            let config = FitConfig {
                n_trees: cell.m,
                max_depth: plan.max_depth,
                grid: GridScheme::Uniform(plan.cutpoints),
                keep_forests: false,
                ..base.clone()
            };
            let trace = fit(train.x.view(), &train.y, Some(test.x.view()), &config)?;
            let report = diagnostics(&trace, &[])?;
            rows.push(RmseRow {
                n: cell.n,
                p: cell.p,
                m: cell.m,
                dgp,
                train_rmse: rmse(&trace.train_prediction().mean(), &train.y),
                test_rmse: rmse(&trace.test_prediction()?.mean(), &test.y),
                acceptance_rate: report.acceptance_rate,
                mean_leaves_per_tree: report.mean_leaves,
            });
        }
    }
    Ok(rows)
}
