use thiserror::Error;

use crate::expr::{EvalError, ExprError};
use crate::metric::Point;

/// Errors raised by distance evaluation and subset construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("point {0} lies outside the carrier")]
    OutsideCarrier(Point),
    #[error("point {point} has the wrong kind for a {expected} carrier")]
    KindMismatch { point: Point, expected: &'static str },
    #[error("real points must be finite, got {0}")]
    NonFinite(f64),
    #[error("invalid subset: {0}")]
    InvalidSubset(String),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
}

/// Errors raised by control-function construction and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("control functions are defined on [0, inf), got t = {0}")]
    NegativeInput(f64),
    #[error("invalid control parameter: {0}")]
    InvalidParameter(String),
    #[error("control expression failed: {0}")]
    Eval(#[from] EvalError),
    #[error("control function returned non-finite value at t = {0}")]
    NonFinite(f64),
}

/// Errors raised while evaluating a coupling map or a self map.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("map expression failed at {args}: {source}")]
    Eval { args: String, source: EvalError },
    #[error("map table has no entry for {0}")]
    MissingEntry(String),
    #[error("expression maps need real points, got {0}")]
    NotReal(Point),
}

/// Umbrella error for checkers and the solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("sample budget exceeded: {needed} candidates > cap {cap}")]
    BudgetExceeded { needed: u64, cap: u64 },
    #[error("start point {point} is not in subset {subset}")]
    StartOutsideSubset { point: Point, subset: &'static str },
    #[error("iterate {point} at step {step} left subset {subset}")]
    OrbitLeftSubset {
        point: Point,
        step: usize,
        subset: &'static str,
    },
    #[error("invalid options: {0}")]
    InvalidOptions(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
