use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid basis request: {0}")]
    InvalidBasis(String),

    #[error("mode index {index} out of range 1..={count}")]
    ModeOutOfRange { index: usize, count: usize },

    #[error("point {0:?} is not strictly inside the box")]
    PointOutsideDomain(Vec<f64>),

    #[error("grid/basis mismatch: {0}")]
    GridMismatch(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("overflow guard: sqrt(lambda_P) * a = {growth:.3} exceeds {limit}")]
    OverflowGuard { growth: f64, limit: f64 },

    #[error(
        "Picard iteration did not converge in {iterations} sweeps (last residual {residual:e})"
    )]
    PicardNotConverged { iterations: usize, residual: f64 },

    #[error("abscissa x = {x} outside [0, {a}]")]
    AbscissaOutOfRange { x: f64, a: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
