//! Continuous hovering spaceship: a single height state pulled toward the
//! crash boundary by state-dependent gravity, counteracted by bounded thrust
//! chosen once per control interval.

use crate::error::DynamicsError;
use crate::ode::rk4_step;

use super::{Dynamics, TransitionOutcome};

/// Hovership model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct HovershipParams {
    /// Base gravitational acceleration.
    pub g0: f64,
    /// Coefficient of the state-dependent gravity term.
    pub g: f64,
    /// Maximum thrust.
    pub a_max: f64,
    /// Crash boundary: the state fails once s >= s_max.
    pub s_max: f64,
    /// Control frequency; a new thrust is chosen every 1/omega seconds.
    pub omega: f64,
}

impl Default for HovershipParams {
    fn default() -> Self {
        Self { g0: 0.1, g: 1.0, a_max: 0.5, s_max: 2.0, omega: 1.0 }
    }
}

impl HovershipParams {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let all = [self.g0, self.g, self.a_max, self.s_max, self.omega];
        if all.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(DynamicsError::InvalidParams(
                "hovership parameters must be finite and positive".into(),
            ));
        }
        if self.a_max >= self.g0 + self.g {
            return Err(DynamicsError::InvalidParams(
                "a_max must be < g0 + g so that some states are unviable".into(),
            ));
        }
        Ok(())
    }
}

/// Fixed-step integration of ds/dt = g0 + tanh(0.75 s) g - a over one control
/// interval, with the thrust held constant. Failure is checked at every
/// substep boundary.
#[derive(Debug, Clone)]
pub struct Hovership {
    params: HovershipParams,
    substeps: usize,
}

const DEFAULT_SUBSTEPS: usize = 20;

impl Hovership {
    pub fn new(params: HovershipParams) -> Result<Self, DynamicsError> {
        params.validate()?;
        Ok(Self { params, substeps: DEFAULT_SUBSTEPS })
    }

    pub fn with_substeps(params: HovershipParams, substeps: usize) -> Result<Self, DynamicsError> {
        if substeps == 0 {
            return Err(DynamicsError::InvalidParams("substeps must be >= 1".into()));
        }
        params.validate()?;
        Ok(Self { params, substeps })
    }

    pub fn params(&self) -> &HovershipParams {
        &self.params
    }

    fn rate(&self, s: f64, a: f64) -> f64 {
        self.params.g0 + (0.75 * s).tanh() * self.params.g - a
    }
}

impl Default for Hovership {
    fn default() -> Self {
        Self::new(HovershipParams::default()).expect("default parameters are valid")
    }
}

impl Dynamics for Hovership {
    fn state_dim(&self) -> usize {
        1
    }

    fn action_dim(&self) -> usize {
        1
    }

    fn is_failure_state(&self, state: &[f64]) -> bool {
        state.len() == 1 && state[0] >= self.params.s_max
    }

    fn step(&self, state: &[f64], action: &[f64]) -> Result<TransitionOutcome, DynamicsError> {
        if state.len() != 1 || !state[0].is_finite() {
            return Err(DynamicsError::InvalidState(format!("{state:?}")));
        }
        if action.len() != 1 || !action[0].is_finite() {
            return Err(DynamicsError::InvalidAction(format!("{action:?}")));
        }
        let a = action[0];
        if !(0.0..=self.params.a_max).contains(&a) {
            return Err(DynamicsError::InvalidAction(format!(
                "thrust {a} outside [0, {}]",
                self.params.a_max
            )));
        }
        let mut s = state[0];
        if s >= self.params.s_max {
            return Ok(TransitionOutcome::failure(vec![s]));
        }
        let h = 1.0 / (self.params.omega * self.substeps as f64);
        let f = |_t: f64, y: &[f64; 1]| [self.rate(y[0], a)];
        for i in 0..self.substeps {
            let [next] = rk4_step(&f, i as f64 * h, &[s], h);
            // the craft rests against the upper boundary at s = 0; only the
            // ground at s_max is a failure
            s = next.max(0.0);
            if s >= self.params.s_max {
                return Ok(TransitionOutcome::failure(vec![s]));
            }
        }
        Ok(TransitionOutcome::ok(vec![s]))
    }
}
