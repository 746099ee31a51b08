//! Brute-force references: exhaustive tree enumeration with dense Gaussian
//! likelihoods, numerical quadrature and a Kolmogorov-Smirnov test.

use bartforge::sampler::Hyperparams;
use bartforge::TreeHeap;

use super::reference::{can_grow, is_leaf, leaf_of, log_prior, nodes, open_axes, open_splits};

/// Every tree structure reachable on a grid with `cuts[a]` cutpoints per
/// axis, leaf values left at 0.
pub fn enumerate_trees(cuts: &[u8], max_depth: u8) -> Vec<TreeHeap> {
    let mut out = Vec::new();
    let root = TreeHeap::root_only(max_depth, 0.0).unwrap();
    expand(root, vec![1], cuts, &mut out);
    out
}

/// Branches on every undecided node in `open`, depth first.
fn expand(tree: TreeHeap, mut open: Vec<usize>, cuts: &[u8], out: &mut Vec<TreeHeap>) {
    let Some(t) = open.pop() else {
        out.push(tree);
        return;
    };
    expand(tree.clone(), open.clone(), cuts, out);
    if !can_grow(&tree, t, cuts) {
        return;
    }
    for axis in open_axes(&tree, t, cuts) {
        for split in open_splits(&tree, t, axis, cuts[axis]) {
            let mut grown = tree.clone();
            grown.split_leaf(t, axis as u16, split);
            let mut next = open.clone();
            next.push(2 * t);
            next.push(2 * t + 1);
            expand(grown, next, cuts, out);
        }
    }
}

/// Log density of `y` under `N(mu 1, s2 I + v 1 1')` by Cholesky.
pub fn log_mvn_equicorrelated(y: &[f64], mu: f64, s2: f64, v: f64) -> f64 {
    let n = y.len();
    if n == 0 {
        return 0.0;
    }
    let mut a = vec![vec![0.0; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = v + if i == j { s2 } else { 0.0 };
        }
    }
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][i] = (a[i][i] - s).sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    let mut w = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i][k] * w[k]).sum();
        w[i] = (y[i] - mu - s) / l[i][i];
    }
    let log_det: f64 = (0..n).map(|i| 2.0 * l[i][i].ln()).sum();
    -0.5 * (n as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + w.iter().map(|v| v * v).sum::<f64>())
}

/// Exact posterior over tree structures for a single tree with fixed
/// `sigma`: prior times the Gaussian density of the responses with every
/// leaf value integrated out.
pub fn structure_posterior(
    trees: &[TreeHeap],
    rows: &[Vec<u8>],
    y: &[f64],
    cuts: &[u8],
    sigma: f64,
    hp: &Hyperparams,
) -> Vec<f64> {
    let logp: Vec<f64> = trees
        .iter()
        .map(|tree| {
            let mut lp = log_prior(tree, 1, cuts, hp);
            for leaf in nodes(tree).0 {
                let ys: Vec<f64> = rows
                    .iter()
                    .zip(y)
                    .filter(|(row, _)| leaf_of(tree, row, 1) == leaf)
                    .map(|(_, &v)| v)
                    .collect();
                lp += log_mvn_equicorrelated(&ys, hp.leaf_mean, sigma * sigma, hp.leaf_sd * hp.leaf_sd);
            }
            lp
        })
        .collect();
    let max = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logp.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|v| v / total).collect()
}

/// Same structure: equal split arrays on every node above the last level.
pub fn same_structure(a: &TreeHeap, b: &TreeHeap) -> bool {
    (1..a.cutpoint.len()).all(|t| {
        is_leaf(a, t) == is_leaf(b, t) && (is_leaf(a, t) || (a.axis[t] == b.axis[t] && a.cutpoint[t] == b.cutpoint[t]))
    })
}

/// `ln ∫ exp(tau s mu - n tau mu^2 / 2) N(mu; mu0, sd^2) dmu` by composite
/// Simpson over a window that brackets the integrand's mass.
pub fn log_marginal_quadrature(count: u32, sum: f64, sigma: f64, mu0: f64, sd: f64) -> f64 {
    let tau = 1.0 / (sigma * sigma);
    let n = count as f64;
    let g = |mu: f64| {
        tau * sum * mu - 0.5 * n * tau * mu * mu
            - 0.5 * ((mu - mu0) / sd).powi(2)
            - 0.5 * (2.0 * std::f64::consts::PI * sd * sd).ln()
    };
    // Golden-section search for the peak of the concave log integrand.
    let (mut a, mut b) = (-1e3, 1e3);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if g(c) > g(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let peak = 0.5 * (a + b);
    let top = g(peak);
    let mut half = 1e-9;
    while g(peak - half) > top - 60.0 || g(peak + half) > top - 60.0 {
        half *= 2.0;
    }
    let intervals = 20_000;
    let h = 2.0 * half / intervals as f64;
    let mut acc = 0.0;
    for k in 0..=intervals {
        let w = if k == 0 || k == intervals {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * (g(peak - half + k as f64 * h) - top).exp();
    }
    top + (acc * h / 3.0).ln()
}

/// Two-sided KS statistic of a sample against U(0, 1).
pub fn ks_uniform(mut u: Vec<f64>) -> f64 {
    u.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(i, &v)| (v - i as f64 / n).max((i + 1) as f64 / n - v))
        .fold(0.0, f64::max)
}

/// Asymptotic p-value of a one-sample KS statistic `d` over `n` points.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut p = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64 * lambda).powi(2)).exp();
        p += if k % 2 == 1 { 2.0 * term } else { -2.0 * term };
        if term < 1e-16 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
