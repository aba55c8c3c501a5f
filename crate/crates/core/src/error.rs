//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid axis: {0}")]
    InvalidAxis(String),
    #[error("coordinate dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("value count mismatch: expected {expected}, found {found}")]
    ValueCountMismatch { expected: usize, found: usize },
    #[error("field domains differ")]
    DomainMismatch,
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("non-finite coordinate")]
    NonFiniteCoordinate,
    #[error("level must be non-negative, got {0}")]
    NegativeLevel(f64),
    #[error("field CSV error: {0}")]
    Csv(String),
}

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("integration failed: {0}")]
    Integrator(#[from] IntegratorError),
}

#[derive(Debug, Error)]
pub enum IntegratorError {
    #[error("step count limit reached at t = {t}")]
    StepLimit { t: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("event `{label}` not localized within tolerance")]
    EventNotLocalized { label: &'static str },
    #[error("expected event `{label}` did not occur before t = {t_end}")]
    EventNotFound { label: &'static str, t_end: f64 },
    #[error("non-finite values produced at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("dynamics step failed at q cell {q_cell} (state {state:?}, action {action:?}): {source}")]
    StepFailed {
        q_cell: usize,
        state: Vec<f64>,
        action: Vec<f64>,
        source: DynamicsError,
    },
    #[error("horizon analysis requires a discrete system")]
    NotDiscrete,
    #[error("cycle detected among unviable states (cells {0:?})")]
    UnviableCycle(Vec<usize>),
    #[error("inconsistent ground truth: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Error)]
pub enum GpError {
    #[error("invalid kernel parameters: {0}")]
    InvalidParams(String),
    #[error("input dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(
        "kernel matrix is not positive definite even with jitter {max_jitter:e} ({n} points)"
    )]
    NotPositiveDefinite { n: usize, max_jitter: f64 },
}

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("invalid threshold schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid learner configuration: {0}")]
    InvalidConfig(String),
    #[error("tabular learning requires a discrete system")]
    NotDiscrete,
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error("dynamics step failed at iteration {iteration}: {source}")]
    StepFailed { iteration: usize, source: DynamicsError },
}
