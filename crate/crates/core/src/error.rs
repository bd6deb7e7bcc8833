use thiserror::Error;

use crate::expr::{EvalError, ParseError};
use crate::jets::JetError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid metric definition: {0}")]
    InvalidMetric(String),
    #[error("inadmissible point: {0}")]
    Inadmissible(String),
    #[error("degenerate metric: |det g| = {det:e} below threshold {threshold:e}")]
    DegenerateMetric { det: f64, threshold: f64 },
    #[error("metric tensor is not positive definite at the point")]
    IndefiniteMetric,
    #[error("degenerate flag: denominator {denominator:e} below threshold {threshold:e}")]
    DegenerateFlag { denominator: f64, threshold: f64 },
    #[error("unsupported dimension {0}: constant flag curvature checks need n > 2")]
    UnsupportedDimension(usize),
    #[error("invalid projective factor: {0}")]
    InvalidFactor(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("{skipped} of {total} samples skipped (limit 20%); first reason: {reason}")]
    TooManySkipped { skipped: usize, total: usize, reason: String },
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
