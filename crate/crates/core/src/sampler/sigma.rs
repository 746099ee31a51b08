use rand::Rng;
use rand_distr::{ChiSquared, Distribution};

use super::Hyperparams;

/// Sum of squared residuals, accumulated in f64 in point order.
pub fn sum_of_squares(residuals: &[f32]) -> f64 {
    residuals.iter().map(|&r| (r as f64) * (r as f64)).sum()
}

/// Draws the error standard deviation from its scaled inverse chi-squared
/// conditional: `sigma^2 = (nu lambda + sum r^2) / X`, `X ~ chi^2(nu + n)`.
pub fn sample_sigma<R: Rng + ?Sized>(residuals: &[f32], hp: &Hyperparams, rng: &mut R) -> f64 {
    let df = hp.nu + residuals.len() as f64;
    let chi2 = ChiSquared::new(df).expect("degrees of freedom are positive");
    let x: f64 = chi2.sample(rng);
    ((hp.nu * hp.lambda + sum_of_squares(residuals)) / x).sqrt()
}
