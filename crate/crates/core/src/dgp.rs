//! Synthetic data generators used by the benchmarks.
//!
//! Formulas index rows `i = 1..=n` and columns `j = 1..=p`; row `i` is
//! stored at position `i - 1`, column `j` at `j - 1`.

use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Normal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::Error;

/// Noise sd of the easy process.
pub const EASY_NOISE_SD: f64 = 0.1;

/// Half-width of the circular band of nonzero quadratic coefficients.
pub const QUADRATIC_BAND: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DgpKind {
    Timing,
    Easy,
    Quadratic,
}

impl std::fmt::Display for DgpKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DgpKind::Timing => "timing",
            DgpKind::Easy => "easy",
            DgpKind::Quadratic => "quadratic",
        })
    }
}

/// Predictors, noisy responses and the noiseless function values.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulated {
    pub x: Array2<f64>,
    pub y: Vec<f64>,
    pub f: Vec<f64>,
}

impl Simulated {
    /// Splits off the last `n - n_first` rows.
    pub fn split(self, n_first: usize) -> (Simulated, Simulated) {
        let (xa, xb) = self.x.view().split_at(Axis(0), n_first);
        let part = |x: ndarray::ArrayView2<'_, f64>, r: std::ops::Range<usize>| Simulated {
            x: x.to_owned(),
            y: self.y[r.clone()].to_vec(),
            f: self.f[r].to_vec(),
        };
        let n = self.y.len();
        (part(xa, 0..n_first), part(xb, n_first..n))
    }
}

/// Deterministic timing data: `y_i = cos(2 n pi / 32 (i - 1) / (n - 1))`,
/// `X_ij = (i + (p + 1) j) mod 256`.
pub fn gen_timing(n: usize, p: usize) -> Result<(Array2<f64>, Vec<f64>), Error> {
    if n < 2 || p < 1 {
        return Err(Error::Config("timing data needs n >= 2 and p >= 1".into()));
    }
    let x = Array2::from_shape_fn((n, p), |(r, c)| ((r + 1 + (p + 1) * (c + 1)) % 256) as f64);
    let scale = 2.0 * n as f64 * std::f64::consts::PI / 32.0;
    let y = (0..n)
        .map(|r| (scale * r as f64 / (n - 1) as f64).cos())
        .collect();
    Ok((x, y))
}

/// `X ~ U(-2, 2)`, `f = sum_j cos(pi X_ij) / sqrt(p)`, `y = f + N(0, sd^2)`.
pub fn gen_easy(n: usize, p: usize, seed: u64) -> Result<Simulated, Error> {
    gen_easy_with_noise(n, p, EASY_NOISE_SD, seed)
}

pub fn gen_easy_with_noise(n: usize, p: usize, noise_sd: f64, seed: u64) -> Result<Simulated, Error> {
    if n < 1 || p < 1 || !(noise_sd >= 0.0) {
        return Err(Error::Config("easy data needs n >= 1, p >= 1 and noise sd >= 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = Uniform::new(-2.0, 2.0).expect("valid range");
    let x = Array2::from_shape_simple_fn((n, p), || rng.sample(u));
    let f: Vec<f64> = x.rows().into_iter().map(|row| easy_mean(row.as_slice().unwrap())).collect();
    let y = f
        .iter()
        .map(|&fi| fi + noise_sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Ok(Simulated { x, y, f })
}

/// Noiseless easy function at one row: `sum_j cos(pi x_j) / sqrt(p)`.
pub fn easy_mean(row: &[f64]) -> f64 {
    let s: f64 = row.iter().map(|v| (std::f64::consts::PI * v).cos()).sum();
    s / (row.len() as f64).sqrt()
}

/// Circular distance between columns `j` and `k` of a `p`-column matrix.
pub fn band_distance(j: usize, k: usize, p: usize) -> usize {
    let d = j.abs_diff(k);
    d.min(p - d)
}

/// Dense linear plus banded quadratic process. Train and test rows are drawn
/// jointly and each term is divided by its sample sd over all rows.
///
/// `beta_j ~ N(0, 1)`, `A_jk ~ N(0, 1)` when the circular distance between
/// `j` and `k` is below 5 and 0 otherwise, `X ~ U(0, 1)`, `eps ~ N(0, 1)`.
pub fn gen_quadratic(
    n_train: usize,
    n_test: usize,
    p: usize,
    seed: u64,
) -> Result<(Simulated, Simulated), Error> {
    let n = n_train + n_test;
    if n < 2 || p < 1 {
        return Err(Error::Config("quadratic data needs at least 2 rows and p >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("valid normal");
    let beta: Vec<f64> = (0..p).map(|_| rng.sample(std_normal)).collect();
    let a = quadratic_coefficients(p, &mut rng);
    let x = Array2::from_shape_simple_fn((n, p), || rng.random::<f64>());
    let eps: Vec<f64> = (0..n).map(|_| rng.sample(std_normal)).collect();

    let linear: Vec<f64> = x.rows().into_iter().map(|r| r.dot(&ndarray::ArrayView1::from(&beta))).collect();
    let quadratic: Vec<f64> = x.rows().into_iter().map(|r| r.dot(&a.dot(&r))).collect();
    let f: Vec<f64> = unit_variance(linear)
        .into_iter()
        .zip(unit_variance(quadratic))
        .map(|(l, q)| l + q)
        .collect();
    let y = f.iter().zip(&eps).map(|(f, e)| f + e).collect();
    Ok(Simulated { x, y, f }.split(n_train))
}

/// Banded `p x p` coefficient matrix, entries drawn row by row.
pub fn quadratic_coefficients<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Array2<f64> {
    let mut a = Array2::zeros((p, p));
    for j in 0..p {
        for k in 0..p {
            if band_distance(j, k, p) < QUADRATIC_BAND {
                a[[j, k]] = rng.sample(StandardNormal);
            }
        }
    }
    a
}

/// Divides by the sample sd, without centering. Constant input is returned
/// unchanged.
pub fn unit_variance(v: Vec<f64>) -> Vec<f64> {
    let sd = sample_sd(&v);
    if !(sd > 0.0) {
        return v;
    }
    v.into_iter().map(|t| t / sd).collect()
}

/// Sample sd with `n - 1` denominator.
pub fn sample_sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(v: &[f64]) -> f64 {
        sample_sd(v).powi(2)
    }

    #[test]
    fn timing_formulas() {
        let (x, y) = gen_timing(1000, 7).unwrap();
        assert_eq!(y[0], 1.0);
        assert_eq!(x[[0, 0]], 9.0);
        let expect = (2.0 * 1000.0 * std::f64::consts::PI / 32.0 * 500.0 / 999.0).cos();
        assert!((y[500] - expect).abs() < 1e-15);
        for i in 0..1000 - 256 {
            for j in 0..7 {
                assert_eq!(x[[i, j]], x[[i + 256, j]]);
            }
        }
        assert!(gen_timing(1, 3).is_err());
    }

    #[test]
    fn easy_variance_and_noise() {
        let d = gen_easy(20_000, 10, 1).unwrap();
        // Var[cos(pi U)] = 1/2 for U ~ U(-2, 2); the 1/sqrt(p) scaling keeps it.
        assert!((var(&d.f) - 0.5).abs() < 0.02, "{}", var(&d.f));
        let noise: Vec<f64> = d.y.iter().zip(&d.f).map(|(y, f)| y - f).collect();
        assert!((sample_sd(&noise) - 0.1).abs() < 0.003);
        assert!((0.5..=1.5).contains(&var(&d.y)));
        assert!(d.x.iter().all(|v| (-2.0..2.0).contains(v)));
    }

    #[test]
    fn easy_at_zero_is_one() {
        assert_eq!(easy_mean(&[0.0]), 1.0);
        assert_eq!(easy_mean(&[0.0; 4]), 2.0);
        let d = gen_easy_with_noise(5, 3, 0.0, 0).unwrap();
        assert_eq!(d.y, d.f);
    }

    #[test]
    fn band_rule() {
        assert_eq!(band_distance(0, 0, 1), 0);
        assert_eq!(band_distance(0, 9, 10), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_ne!(quadratic_coefficients(1, &mut rng)[[0, 0]], 0.0);
        let a = quadratic_coefficients(30, &mut rng);
        for row in a.rows() {
            assert_eq!(row.iter().filter(|v| **v != 0.0).count(), 9);
        }
    }

    #[test]
    fn quadratic_terms_are_standardized_jointly() {
        let (train, test) = gen_quadratic(9000, 1000, 100, 3).unwrap();
        assert_eq!((train.y.len(), test.y.len()), (9000, 1000));
        let y: Vec<f64> = train.y.iter().chain(&test.y).copied().collect();
        assert!((var(&y) - 3.0).abs() < 0.3, "{}", var(&y));
        let f: Vec<f64> = train.f.iter().chain(&test.f).copied().collect();
        assert!((var(&f) - 2.0).abs() < 0.3);
    }

    #[test]
    fn unit_variance_is_exact() {
        let v: Vec<f64> = (0..100).map(|i| (i as f64).sqrt() + 3.0).collect();
        assert!((var(&unit_variance(v)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(gen_easy(50, 3, 9).unwrap(), gen_easy(50, 3, 9).unwrap());
        assert_ne!(gen_easy(50, 3, 9).unwrap(), gen_easy(50, 3, 10).unwrap());
        assert_eq!(gen_quadratic(20, 5, 4, 2).unwrap(), gen_quadratic(20, 5, 4, 2).unwrap());
    }
}
