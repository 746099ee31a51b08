//! Fit/predict entry points, data-driven hyperparameters and diagnostics.
//!
//! The sampler works on a rescaled response: `y` is shifted and scaled so
//! that its observed range maps to `[-0.5, 0.5]`. Every value stored in a
//! [`Trace`] (function values, sigma) is on the original scale; stored
//! forests keep scaled leaf values and are mapped back on evaluation.

use std::sync::Arc;

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::grid::{quantize, CutpointGrid, GridScheme, QuantizedMatrix};
use crate::rng::ChainKey;
use crate::sampler::{Hyperparams, SamplerState};
use crate::tree::{evaluate_forest, Forest};
use crate::Error;

/// Mean leaves per tree above which a fit is flagged as overgrown.
pub const MAX_HEALTHY_LEAVES: f64 = 10.0;

/// Acceptance rate below which a chain is flagged as stuck: an order of
/// magnitude under the 10-30% a healthy fit shows.
pub const ACCEPTANCE_COLLAPSE: f64 = 0.03;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub n_trees: usize,
    pub n_burn: usize,
    pub n_kept: usize,
    pub thinning: usize,
    pub max_depth: u8,
    pub grid: GridScheme,
    pub seed: u64,
    /// Leaf prior scale factor: the prior sd of the sum of trees is
    /// `0.5 / k` on the scaled response.
    pub k: f64,
    /// Prior probability that sigma is below the sample sd of the response.
    pub q: f64,
    pub nu: f64,
    pub n_chains: usize,
    pub p_grow: f64,
    /// Retain every kept forest so `predict` works on new data.
    pub keep_forests: bool,
    /// Pins sigma (original scale) instead of sampling it.
    pub fixed_sigma: Option<f64>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            n_trees: 200,
            n_burn: 1000,
            n_kept: 1000,
            thinning: 1,
            max_depth: 6,
            grid: GridScheme::default(),
            seed: 0,
            k: 2.0,
            q: 0.9,
            nu: 3.0,
            n_chains: 2,
            p_grow: 0.5,
            keep_forests: true,
            fixed_sigma: None,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |what: &str| Err(Error::Config(what.into()));
        if self.n_trees == 0 || self.n_kept == 0 || self.thinning == 0 || self.n_chains == 0 {
            return bad("tree, kept-draw, thinning and chain counts must be positive");
        }
        if !(self.k > 0.0) {
            return bad("k must be positive");
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return bad("q must lie in (0, 1)");
        }
        if let Some(s) = self.fixed_sigma {
            if !(s > 0.0 && s.is_finite()) {
                return bad("fixed sigma must be positive");
            }
        }
        if let GridScheme::Uniform(0) = self.grid {
            return bad("a uniform grid needs at least one cutpoint");
        }
        Ok(())
    }

    /// Sampler iterations per chain.
    pub fn n_iterations(&self) -> usize {
        self.n_burn + self.n_kept * self.thinning
    }
}

/// Affine map between the original and the scaled response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub min: f64,
    pub range: f64,
}

impl Scaling {
    pub fn of(y: &[f64]) -> Result<Self, Error> {
        if y.len() < 2 {
            return Err(Error::Data("at least two responses are needed".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite response".into()));
        }
        let min = y.iter().copied().fold(f64::INFINITY, f64::min);
        let max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let range = max - min;
        if !(range > 0.0) || !range.is_finite() {
            return Err(Error::DegenerateScale);
        }
        Ok(Self { min, range })
    }

    pub fn to_scaled(&self, y: f64) -> f64 {
        (y - self.min) / self.range - 0.5
    }

    pub fn to_original(&self, f: f64) -> f64 {
        (f + 0.5) * self.range + self.min
    }
}

/// Hyperparameters plus the transformations they were derived under.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub hyperparams: Hyperparams,
    pub scaling: Scaling,
    /// Sample sd of the scaled response; the initial sigma.
    pub response_sd: f64,
}

/// Scales `y` to `[-0.5, 0.5]`, sets the leaf prior to `N(0, (0.5 / (k
/// sqrt(m)))^2)` and picks `lambda` so that `P(sigma^2 < s^2) = q` under the
/// `nu lambda / chi^2_nu` prior, `s^2` being the sample variance of scaled y.
pub fn derive_hyperparams(y: &[f64], config: &FitConfig) -> Result<Calibration, Error> {
    config.validate()?;
    let scaling = Scaling::of(y)?;
    let scaled: Vec<f64> = y.iter().map(|&v| scaling.to_scaled(v)).collect();
    let n = scaled.len() as f64;
    let mean = scaled.iter().sum::<f64>() / n;
    let var = scaled.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let chi2 = ChiSquared::new(config.nu).map_err(|e| Error::Config(e.to_string()))?;
    let lambda = var * chi2.inverse_cdf(1.0 - config.q) / config.nu;
    let hyperparams = Hyperparams {
        n_trees: config.n_trees,
        leaf_mean: 0.0,
        leaf_sd: 0.5 / (config.k * (config.n_trees as f64).sqrt()),
        nu: config.nu,
        lambda,
        max_depth: config.max_depth,
        p_grow: config.p_grow,
        ..Hyperparams::default()
    };
    hyperparams.validate()?;
    Ok(Calibration {
        hyperparams,
        scaling,
        response_sd: var.sqrt(),
    })
}

/// Draws of one chain. Function values are draw-major: draw `s`, point `i`
/// at `s * n_points + i`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChainTrace {
    pub sigma: Vec<f64>,
    pub train: Vec<f64>,
    pub test: Vec<f64>,
    /// Kept forests with scaled leaf values; empty unless retained.
    pub forests: Vec<Forest>,
    /// Iteration-major acceptance flags, `n_trees` per iteration, burn-in
    /// included.
    pub accepted: Vec<u8>,
    /// Mean leaves per tree after every iteration, burn-in included.
    pub mean_leaves: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub config: FitConfig,
    pub hyperparams: Hyperparams,
    pub scaling: Scaling,
    pub grid: Arc<CutpointGrid>,
    pub n_train: usize,
    pub n_test: usize,
    pub chains: Vec<ChainTrace>,
}

impl Trace {
    pub fn n_draws(&self) -> usize {
        self.chains.len() * self.config.n_kept
    }

    pub fn has_forests(&self) -> bool {
        self.chains.iter().all(|c| !c.forests.is_empty())
    }

    /// Posterior draws of the function at the training points, chains
    /// concatenated.
    pub fn train_prediction(&self) -> Prediction {
        Prediction::from_chains(self.n_train, self.chains.iter().map(|c| &c.train[..]))
    }

    /// Posterior draws at the test points supplied to [`fit`].
    pub fn test_prediction(&self) -> Result<Prediction, Error> {
        if self.n_test == 0 {
            return Err(Error::MissingForests);
        }
        Ok(Prediction::from_chains(self.n_test, self.chains.iter().map(|c| &c.test[..])))
    }

    /// Function value draws at training point `i` for each chain.
    pub fn train_draws_at(&self, i: usize) -> Vec<Vec<f64>> {
        self.chains
            .iter()
            .map(|c| c.train.iter().skip(i).step_by(self.n_train).copied().collect())
            .collect()
    }

    /// Forest evaluated on the original scale.
    pub fn evaluate(&self, forest: &Forest, x: &QuantizedMatrix) -> Vec<f64> {
        evaluate_forest(forest, x)
            .into_iter()
            .map(|f| self.scaling.to_original(f))
            .collect()
    }
}

/// Posterior function draws at a set of points, draw-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub n_points: usize,
    pub n_draws: usize,
    pub values: Vec<f64>,
}

/// Pointwise posterior summary with a central interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub point: usize,
    pub mean: f64,
    pub sd: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Prediction {
    fn from_chains<'a>(n_points: usize, chains: impl Iterator<Item = &'a [f64]>) -> Self {
        let values: Vec<f64> = chains.flat_map(|c| c.iter().copied()).collect();
        let n_draws = values.len().checked_div(n_points).unwrap_or(0);
        Self {
            n_points,
            n_draws,
            values,
        }
    }

    pub fn draw(&self, s: usize) -> &[f64] {
        &self.values[s * self.n_points..(s + 1) * self.n_points]
    }

    pub fn draws_at(&self, i: usize) -> Vec<f64> {
        (0..self.n_draws).map(|s| self.values[s * self.n_points + i]).collect()
    }

    pub fn mean(&self) -> Vec<f64> {
        self.summarize(0.0).iter().map(|s| s.mean).collect()
    }

    /// Mean, sd (n - 1 denominator) and central `level` interval per point.
    pub fn summarize(&self, level: f64) -> Vec<PointSummary> {
        let lo_q = (1.0 - level) / 2.0;
        (0..self.n_points)
            .map(|i| {
                let mut d = self.draws_at(i);
                let n = d.len() as f64;
                let mean = d.iter().sum::<f64>() / n;
                let sd = if d.len() > 1 {
                    (d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
                } else {
                    0.0
                };
                d.sort_by(f64::total_cmp);
                PointSummary {
                    point: i,
                    mean,
                    sd,
                    lower: quantile_sorted(&d, lo_q),
                    upper: quantile_sorted(&d, 1.0 - lo_q),
                }
            })
            .collect()
    }
}

/// Linear interpolation between order statistics at `(len - 1) q`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn check_matrix(x: ArrayView2<'_, f64>, what: &str) -> Result<(), Error> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data(format!("non-finite value in {what} predictors")));
    }
    Ok(())
}

/// Runs `n_chains` independent chains and records kept draws.
pub fn fit(
    x: ArrayView2<'_, f64>,
    y: &[f64],
    x_test: Option<ArrayView2<'_, f64>>,
    config: &FitConfig,
) -> Result<Trace, Error> {
    config.validate()?;
    let (n, p) = x.dim();
    if y.len() != n {
        return Err(Error::Shape(format!("{n} predictor rows but {} responses", y.len())));
    }
    if p == 0 {
        return Err(Error::Shape("at least one predictor is needed".into()));
    }
    check_matrix(x, "training")?;
    let calibration = derive_hyperparams(y, config)?;
    let grid = Arc::new(CutpointGrid::build(x, config.grid)?);
    if grid.is_degenerate() {
        return Err(Error::DegenerateGrid);
    }
    let xq = Arc::new(quantize(x, &grid)?);
    let xt = match x_test {
        Some(t) => {
            check_matrix(t, "test")?;
            Some(quantize(t, &grid)?)
        }
        None => None,
    };
    let scaling = calibration.scaling;
    let y_scaled: Vec<f32> = y.iter().map(|&v| scaling.to_scaled(v) as f32).collect();

    let chains = (0..config.n_chains)
        .into_par_iter()
        .map(|c| {
            let state = SamplerState::new(
                Arc::clone(&xq),
                y_scaled.clone(),
                calibration.hyperparams.clone(),
                calibration.response_sd,
                ChainKey::new(config.seed, c as u64),
            )?;
            Ok(run_chain(state, config, &scaling, xt.as_ref()))
        })
        .collect::<Result<Vec<_>, Error>>()?;

    Ok(Trace {
        config: config.clone(),
        hyperparams: calibration.hyperparams,
        scaling,
        grid,
        n_train: n,
        n_test: xt.as_ref().map_or(0, |t| t.n_rows()),
        chains,
    })
}

fn run_chain(
    mut state: SamplerState,
    config: &FitConfig,
    scaling: &Scaling,
    x_test: Option<&QuantizedMatrix>,
) -> ChainTrace {
    if let Some(s) = config.fixed_sigma {
        state.set_sigma(s / scaling.range);
        state.fix_sigma(true);
    }
    let original = |f: Vec<f64>| f.into_iter().map(|v| scaling.to_original(v));
    let m = config.n_trees;
    let total = config.n_iterations();
    let mut out = ChainTrace {
        accepted: Vec::with_capacity(total * m),
        mean_leaves: Vec::with_capacity(total),
        ..Default::default()
    };
    for it in 0..total {
        state.step();
        out.accepted.extend(state.last_accepted().iter().map(|&a| a as u8));
        out.mean_leaves.push(state.forest().mean_leaves());
        let kept = it >= config.n_burn && (it - config.n_burn + 1).is_multiple_of(config.thinning);
        if !kept {
            continue;
        }
        out.sigma.push(state.sigma() * scaling.range);
        out.train.extend(original(evaluate_forest(state.forest(), state.predictors())));
        if let Some(t) = x_test {
            out.test.extend(original(evaluate_forest(state.forest(), t)));
        }
        if config.keep_forests {
            out.forests.push(state.forest().clone());
        }
    }
    out
}

/// Posterior draws of the function at new points, from retained forests.
pub fn predict(trace: &Trace, x: ArrayView2<'_, f64>) -> Result<Prediction, Error> {
    if !trace.has_forests() {
        return Err(Error::MissingForests);
    }
    check_matrix(x, "prediction")?;
    let xq = quantize(x, &trace.grid)?;
    let per_chain: Vec<Vec<f64>> = trace
        .chains
        .iter()
        .map(|c| c.forests.iter().flat_map(|f| trace.evaluate(f, &xq)).collect())
        .collect();
    Ok(Prediction::from_chains(x.nrows(), per_chain.iter().map(|v| &v[..])))
}

/// Convergence and health report of a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Accepted fraction of post-burn-in moves, all chains and trees.
    pub acceptance_rate: f64,
    pub chain_acceptance: Vec<f64>,
    pub tree_acceptance: Vec<f64>,
    /// Training points compared across chains.
    pub points: Vec<usize>,
    /// Largest two-sample Kolmogorov-Smirnov distance between any two
    /// chains' draws, per compared point.
    pub cross_chain_ks: Vec<f64>,
    /// Post-burn-in mean leaves per tree.
    pub mean_leaves: f64,
    pub too_many_leaves: bool,
    pub acceptance_collapse: bool,
}

/// `n_points` training indices spread evenly over `0..n`.
pub fn spread_points(n: usize, n_points: usize) -> Vec<usize> {
    let k = n_points.min(n);
    if k <= 1 {
        return vec![0; k];
    }
    (0..k).map(|i| i * (n - 1) / (k - 1)).collect()
}

pub fn diagnostics(trace: &Trace, points: &[usize]) -> Result<Diagnostics, Error> {
    if let Some(&bad) = points.iter().find(|&&i| i >= trace.n_train) {
        return Err(Error::Config(format!("diagnostic point {bad} is not a training point")));
    }
    let m = trace.config.n_trees;
    let burn = trace.config.n_burn;
    let mut tree_hits = vec![0u64; m];
    let mut chain_acceptance = Vec::with_capacity(trace.chains.len());
    let mut leaves = 0.0;
    let mut post_iterations = 0usize;
    for c in &trace.chains {
        let post = &c.accepted[burn * m..];
        let mut hits = 0u64;
        for row in post.chunks_exact(m) {
            for (h, &a) in tree_hits.iter_mut().zip(row) {
                *h += a as u64;
                hits += a as u64;
            }
        }
        let iters = post.len() / m;
        chain_acceptance.push(hits as f64 / (iters * m).max(1) as f64);
        leaves += c.mean_leaves[burn..].iter().sum::<f64>();
        post_iterations += iters;
    }
    let denom = post_iterations.max(1) as f64;
    let tree_acceptance: Vec<f64> = tree_hits.iter().map(|&h| h as f64 / denom).collect();
    let acceptance_rate = tree_acceptance.iter().sum::<f64>() / m as f64;
    let mean_leaves = leaves / denom;

    let cross_chain_ks = points
        .iter()
        .map(|&i| {
            let draws = trace.train_draws_at(i);
            let mut worst = 0.0f64;
            for a in 0..draws.len() {
                for b in a + 1..draws.len() {
                    worst = worst.max(ks_distance(&draws[a], &draws[b]));
                }
            }
            worst
        })
        .collect();

    Ok(Diagnostics {
        acceptance_rate,
        chain_acceptance,
        tree_acceptance,
        points: points.to_vec(),
        cross_chain_ks,
        mean_leaves,
        too_many_leaves: mean_leaves > MAX_HEALTHY_LEAVES,
        acceptance_collapse: acceptance_rate < ACCEPTANCE_COLLAPSE,
    })
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::ChiSquared as ChiSquaredDraw;

    fn small_config() -> FitConfig {
        FitConfig {
            n_trees: 10,
            n_burn: 20,
            n_kept: 30,
            max_depth: 4,
            grid: GridScheme::Uniform(10),
            ..Default::default()
        }
    }

    fn noise_data(n: usize, seed: u64) -> (Array2<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, 2), |_| rng.random::<f64>());
        let y = (0..n).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
        (x, y)
    }

    #[test]
    fn leaf_sd_formula() {
        let cal = derive_hyperparams(&[0.0, 1.0], &FitConfig::default()).unwrap();
        assert!((cal.hyperparams.leaf_sd - 0.5 / (2.0 * 200f64.sqrt())).abs() < 1e-15);
        assert!((cal.hyperparams.leaf_sd - 0.01768).abs() < 1e-5);
        assert_eq!(cal.hyperparams.leaf_mean, 0.0);
    }

    #[test]
    fn scaled_range_is_one() {
        let y = [3.0, -1.5, 7.25, 2.0];
        let s = Scaling::of(&y).unwrap();
        let scaled: Vec<f64> = y.iter().map(|&v| s.to_scaled(v)).collect();
        let max = scaled.iter().copied().fold(f64::MIN, f64::max);
        let min = scaled.iter().copied().fold(f64::MAX, f64::min);
        assert_eq!(max - min, 1.0);
        assert_eq!((min, max), (-0.5, 0.5));
        for &v in &y {
            assert!((s.to_original(s.to_scaled(v)) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_response_is_degenerate() {
        assert!(matches!(
            derive_hyperparams(&[2.0; 5], &FitConfig::default()),
            Err(Error::DegenerateScale)
        ));
    }

    #[test]
    fn lambda_puts_mass_q_below_sample_variance() {
        let (_, y) = noise_data(500, 1);
        let cfg = FitConfig::default();
        let cal = derive_hyperparams(&y, &cfg).unwrap();
        let s2 = cal.response_sd * cal.response_sd;
        let hp = &cal.hyperparams;
        let chi = ChiSquaredDraw::new(hp.nu).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let draws = 200_000;
        let below = (0..draws)
            .filter(|_| hp.nu * hp.lambda / rng.sample(chi) < s2)
            .count();
        let frac = below as f64 / draws as f64;
        assert!((frac - 0.9).abs() < 0.01, "{frac}");
    }

    #[test]
    fn fit_is_deterministic() {
        let (x, y) = noise_data(40, 3);
        let a = fit(x.view(), &y, Some(x.view()), &small_config()).unwrap();
        let b = fit(x.view(), &y, Some(x.view()), &small_config()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn predict_on_training_data_matches_stored_draws() {
        let (x, y) = noise_data(40, 4);
        let trace = fit(x.view(), &y, None, &small_config()).unwrap();
        let p = predict(&trace, x.view()).unwrap();
        assert_eq!(p, trace.train_prediction());
        assert_eq!(p.n_draws, 2 * 30);
    }

    #[test]
    fn missing_forests_is_an_error() {
        let (x, y) = noise_data(30, 5);
        let cfg = FitConfig {
            keep_forests: false,
            ..small_config()
        };
        let trace = fit(x.view(), &y, None, &cfg).unwrap();
        assert!(matches!(predict(&trace, x.view()), Err(Error::MissingForests)));
        assert!(matches!(trace.test_prediction(), Err(Error::MissingForests)));
    }

    #[test]
    fn shrinks_pure_noise() {
        let (x, y) = noise_data(50, 6);
        let trace = fit(x.view(), &y, None, &small_config()).unwrap();
        let mean = trace.train_prediction().mean();
        let var = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / v.len() as f64
        };
        assert!(var(&mean) < var(&y));
    }

    #[test]
    fn identical_chains_have_zero_discrepancy() {
        let (x, y) = noise_data(30, 7);
        let mut trace = fit(x.view(), &y, None, &small_config()).unwrap();
        trace.chains[1] = trace.chains[0].clone();
        let d = diagnostics(&trace, &spread_points(30, 5)).unwrap();
        assert!(d.cross_chain_ks.iter().all(|&k| k == 0.0));
    }

    #[test]
    fn constant_draws_summary() {
        let p = Prediction {
            n_points: 2,
            n_draws: 3,
            values: vec![1.0, 5.0, 1.0, 6.0, 1.0, 7.0],
        };
        let s = p.summarize(0.5);
        assert_eq!((s[0].mean, s[0].sd, s[0].lower, s[0].upper), (1.0, 0.0, 1.0, 1.0));
        assert_eq!((s[1].mean, s[1].sd, s[1].lower, s[1].upper), (6.0, 1.0, 5.5, 6.5));
    }

    #[test]
    fn ks_distance_examples() {
        assert_eq!(ks_distance(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_distance(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert_eq!(ks_distance(&[1.0, 3.0], &[2.0, 4.0]), 0.5);
    }

    #[test]
    fn spread_points_cover_range() {
        assert_eq!(spread_points(101, 5), vec![0, 25, 50, 75, 100]);
        assert_eq!(spread_points(3, 5), vec![0, 1, 2]);
    }
}
