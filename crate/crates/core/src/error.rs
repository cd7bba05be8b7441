use thiserror::Error;

use crate::expr::ExprError;
use crate::timescale::TimeScaleError;
use crate::volterra::IterationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    TimeScale(#[from] TimeScaleError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("{0} is not a grid point")]
    PointNotOnGrid(f64),
    #[error("grid function does not match the problem grid: {0}")]
    GridMismatch(String),
    #[error("non-finite value {value} at t = {t}")]
    NonFinite { t: f64, value: f64 },
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("successive approximation did not reach tolerance after {iterations} iterations (final gap {final_gap:e})")]
    NoConvergence {
        iterations: usize,
        final_gap: f64,
        report: Box<IterationReport>,
    },
    #[error("{0} is not right-scattered")]
    NotRightScattered(f64),
    #[error("singular diagonal 1 - (h/2) k(t,t) = {value:e} at t = {t}; reduce the grid step")]
    SingularDiagonal { t: f64, value: f64 },
    #[error("omega must be positive, got {value} at t = {t}")]
    NonPositiveOmega { t: f64, value: f64 },
    #[error("residual {residual:e} exceeds omega {omega:e} at t = {t}")]
    HypothesisViolated { t: f64, residual: f64, omega: f64 },
    #[error("growth condition fails: P* = {p} is not below 1")]
    ConditionFailed { p: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
