//! Five-state hovering-spaceship grid world: a discrete system small enough
//! to verify every set and measure by hand.

use crate::error::DynamicsError;

use super::{Dynamics, TransitionOutcome};

pub const TOY_NUM_STATES: usize = 5;
pub const TOY_NUM_ACTIONS: usize = 3;

/// Deterministic transition table over states 1..=5 and actions 0..=2
/// (coast, weak thrust, strong thrust).
#[derive(Debug, Clone, PartialEq)]
pub struct ToyTable {
    transitions: [[usize; TOY_NUM_ACTIONS]; TOY_NUM_STATES],
    failure_states: Vec<usize>,
}

impl ToyTable {
    pub fn new(
        transitions: [[usize; TOY_NUM_ACTIONS]; TOY_NUM_STATES],
        failure_states: Vec<usize>,
    ) -> Result<Self, DynamicsError> {
        for row in &transitions {
            for &next in row {
                if !(1..=TOY_NUM_STATES).contains(&next) {
                    return Err(DynamicsError::InvalidParams(format!(
                        "successor {next} outside 1..={TOY_NUM_STATES}"
                    )));
                }
            }
        }
        for &s in &failure_states {
            if !(1..=TOY_NUM_STATES).contains(&s) {
                return Err(DynamicsError::InvalidParams(format!(
                    "failure state {s} outside 1..={TOY_NUM_STATES}"
                )));
            }
        }
        Ok(Self { transitions, failure_states })
    }

    pub fn successor(&self, state: usize, action: usize) -> usize {
        self.transitions[state - 1][action]
    }

    pub fn is_failure(&self, state: usize) -> bool {
        self.failure_states.contains(&state)
    }

    pub fn failure_states(&self) -> &[usize] {
        &self.failure_states
    }
}

impl Default for ToyTable {
    /// Ship with a table where gravity pulls toward the crash state 5 and
    /// grows stronger with the state index:
    /// - states 1-3 are viable; state 3 only via hovering in place,
    /// - state 4 has not failed but every action crashes,
    /// - state 5 is the failure state.
    fn default() -> Self {
        Self::new(
            [
                // [coast, weak, strong] successors per state
                [2, 1, 1], // s = 1: high up, everything stays safe
                [4, 3, 1], // s = 2: coasting drops too far
                [5, 4, 3], // s = 3: only full thrust holds position
                [5, 5, 5], // s = 4: too low, thrust cannot recover
                [5, 5, 5], // s = 5: crashed
            ],
            vec![5],
        )
        .expect("table is well-formed")
    }
}

/// The toy table exposed through the [`Dynamics`] trait. States and actions
/// travel as length-1 vectors holding the integer index.
#[derive(Debug, Clone, Default)]
pub struct ToyModel {
    table: ToyTable,
}

impl ToyModel {
    pub fn new(table: ToyTable) -> Self {
        Self { table }
    }

    pub fn table(&self) -> &ToyTable {
        &self.table
    }

    fn state_index(state: &[f64]) -> Result<usize, DynamicsError> {
        if state.len() != 1 || !state[0].is_finite() {
            return Err(DynamicsError::InvalidState(format!("{state:?}")));
        }
        let s = state[0].round();
        if !(1.0..=TOY_NUM_STATES as f64).contains(&s) {
            return Err(DynamicsError::InvalidState(format!("{state:?}")));
        }
        Ok(s as usize)
    }

    fn action_index(action: &[f64]) -> Result<usize, DynamicsError> {
        if action.len() != 1 || !action[0].is_finite() {
            return Err(DynamicsError::InvalidAction(format!("{action:?}")));
        }
        let a = action[0].round();
        if !(0.0..TOY_NUM_ACTIONS as f64).contains(&a) {
            return Err(DynamicsError::InvalidAction(format!("{action:?}")));
        }
        Ok(a as usize)
    }
}

impl Dynamics for ToyModel {
    fn state_dim(&self) -> usize {
        1
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn is_discrete(&self) -> bool {
        true
    }

    fn is_failure_state(&self, state: &[f64]) -> bool {
        Self::state_index(state).map(|s| self.table.is_failure(s)).unwrap_or(false)
    }

    fn step(&self, state: &[f64], action: &[f64]) -> Result<TransitionOutcome, DynamicsError> {
        let s = Self::state_index(state)?;
        let a = Self::action_index(action)?;
        if self.table.is_failure(s) {
            // failure states have no meaningful transitions
            return Ok(TransitionOutcome::failure(vec![s as f64]));
        }
        let next = self.table.successor(s, a);
        Ok(TransitionOutcome {
            next_state: vec![next as f64],
            failed: self.table.is_failure(next),
        })
    }
}
