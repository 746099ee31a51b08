use std::io;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid data: {0}")]
    Data(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("response has zero range; cannot derive a scale")]
    DegenerateScale,
    #[error("every predictor is constant; no split is available")]
    DegenerateGrid,
    #[error("trace keeps neither forests nor precomputed test values")]
    MissingForests,
    #[error("malformed container: {0}")]
    Format(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
