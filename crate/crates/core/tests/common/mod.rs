//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

pub mod oracles;
pub mod reference;

use std::sync::Arc;

use bartforge::grid::quantize;
use bartforge::interface::Calibration;
use bartforge::{derive_hyperparams, CutpointGrid, FitConfig, QuantizedMatrix};
use ndarray::Array2;

/// Quantized predictors, scaled responses and calibration, as `fit` builds
/// them for one chain.
pub fn prepare(x: &Array2<f64>, y: &[f64], config: &FitConfig) -> (Arc<QuantizedMatrix>, Vec<f32>, Calibration) {
    let grid = Arc::new(CutpointGrid::build(x.view(), config.grid).unwrap());
    let xq = Arc::new(quantize(x.view(), &grid).unwrap());
    let cal = derive_hyperparams(y, config).unwrap();
    let ys = y.iter().map(|&v| cal.scaling.to_scaled(v) as f32).collect();
    (xq, ys, cal)
}
