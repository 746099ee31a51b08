use bartforge::dgp::{gen_easy, gen_easy_with_noise};
use bartforge::interface::{diagnostics, fit, predict, spread_points};
use bartforge::{FitConfig, GridScheme};
use ndarray::Array2;

fn small(seed: u64) -> FitConfig {
    FitConfig {
        n_trees: 20,
        n_burn: 100,
        n_kept: 100,
        grid: GridScheme::Uniform(30),
        seed,
        ..FitConfig::default()
    }
}

fn rmse(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64).sqrt()
}

/// Fitting `4 y + 0.5` and mapping back equals fitting `y`. Responses are
/// multiples of 2^-10 so the affine map is exact in floating point.
#[test]
fn fits_are_scale_equivariant() {
    let d = gen_easy(150, 3, 4).unwrap();
    let y: Vec<f64> = d.y.iter().map(|v| (v * 1024.0).round() / 1024.0).collect();
    let (a, b) = (4.0, 0.5);
    let y2: Vec<f64> = y.iter().map(|v| a * v + b).collect();
    let t1 = fit(d.x.view(), &y, None, &small(4)).unwrap();
    let t2 = fit(d.x.view(), &y2, None, &small(4)).unwrap();
    let (p1, p2) = (t1.train_prediction(), t2.train_prediction());
    for (u, v) in p1.values.iter().zip(&p2.values) {
        let expect = a * u + b;
        assert!((v - expect).abs() <= 1e-5 * expect.abs().max(1.0), "{v} vs {expect}");
    }
    for (c1, c2) in t1.chains.iter().zip(&t2.chains) {
        for (s1, s2) in c1.sigma.iter().zip(&c2.sigma) {
            assert!((s2 - a * s1).abs() <= 1e-5 * s2);
        }
    }
    let x_new = Array2::from_shape_fn((7, 3), |(i, j)| -1.5 + 0.4 * i as f64 + 0.1 * j as f64);
    let q1 = predict(&t1, x_new.view()).unwrap().mean();
    let q2 = predict(&t2, x_new.view()).unwrap().mean();
    for (u, v) in q1.iter().zip(&q2) {
        assert!((v - (a * u + b)).abs() <= 1e-5 * v.abs().max(1.0));
    }
}

/// Averaging more kept draws lowers the error of the posterior mean, on
/// average over seeds.
#[test]
fn more_kept_draws_do_not_hurt_on_average() {
    let (mut few, mut many) = (0.0, 0.0);
    for seed in 0..6 {
        let d = gen_easy(200, 3, 40 + seed).unwrap();
        let base = FitConfig {
            n_trees: 30,
            n_burn: 200,
            keep_forests: false,
            seed,
            ..FitConfig::default()
        };
        let short = fit(d.x.view(), &d.y, None, &FitConfig { n_kept: 3, ..base.clone() }).unwrap();
        let long = fit(d.x.view(), &d.y, None, &FitConfig { n_kept: 300, ..base }).unwrap();
        few += rmse(&short.train_prediction().mean(), &d.f);
        many += rmse(&long.train_prediction().mean(), &d.f);
    }
    assert!(many <= few, "300 kept: {many}, 3 kept: {few}");
}

/// Pinning sigma far below the signal scale freezes the trees, and the
/// report flags it; the same data with sigma sampled is not flagged.
#[test]
fn pinned_low_noise_collapses_acceptance() {
    let d = gen_easy_with_noise(400, 5, 1e-4, 9).unwrap();
    let base = FitConfig {
        n_trees: 50,
        n_burn: 300,
        n_kept: 300,
        keep_forests: false,
        seed: 9,
        ..FitConfig::default()
    };
    let pinned = fit(d.x.view(), &d.y, None, &FitConfig { fixed_sigma: Some(1e-4), ..base.clone() }).unwrap();
    let report = diagnostics(&pinned, &spread_points(400, 5)).unwrap();
    assert!(report.acceptance_collapse, "acceptance {}", report.acceptance_rate);

    let free = fit(d.x.view(), &d.y, None, &base).unwrap();
    let report = diagnostics(&free, &spread_points(400, 5)).unwrap();
    assert!(!report.acceptance_collapse, "acceptance {}", report.acceptance_rate);
}
