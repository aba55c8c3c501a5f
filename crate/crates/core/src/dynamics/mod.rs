//! Transition maps sampled as black boxes by the learner and swept
//! exhaustively by the ground-truth computation.

mod hovership;
mod slip;
mod toy;

pub use hovership::{Hovership, HovershipParams};
pub use slip::{FailureKind, Slip, SlipParams, SlipStep};
pub use toy::{ToyModel, ToyTable, TOY_NUM_ACTIONS, TOY_NUM_STATES};

use crate::error::DynamicsError;

/// Result of sampling one transition.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionOutcome {
    pub next_state: Vec<f64>,
    pub failed: bool,
}

impl TransitionOutcome {
    pub fn ok(next_state: Vec<f64>) -> Self {
        Self { next_state, failed: false }
    }

    pub fn failure(next_state: Vec<f64>) -> Self {
        Self { next_state, failed: true }
    }
}

/// A deterministic transition map. Implementations are stateless given their
/// parameters and safe to call concurrently.
pub trait Dynamics: Sync {
    fn state_dim(&self) -> usize;

    fn action_dim(&self) -> usize;

    /// Whether the system is declared discrete (counting measure, integer
    /// cell semantics).
    fn is_discrete(&self) -> bool {
        false
    }

    /// Whether a state belongs to the failure set. Sampling from a failure
    /// state returns `failed` immediately.
    fn is_failure_state(&self, state: &[f64]) -> bool;

    /// Sample the transition from `state` under `action`.
    fn step(&self, state: &[f64], action: &[f64]) -> Result<TransitionOutcome, DynamicsError>;
}
