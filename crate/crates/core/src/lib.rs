//! Viability kernels, safety measures, and model-free safe learning for
//! simulated dynamical systems.
//!
//! The crate has three layers:
//!
//! - exact ground truth: uniform grids over state and state-action spaces
//!   ([`grid`]), black-box transition maps ([`dynamics`]), and brute-force
//!   computation of viable sets and safety measures ([`oracle`]);
//! - probabilistic estimates: Gaussian-process regression over the
//!   state-action space ([`gp`]);
//! - active sampling: a learner that samples the dynamics while avoiding
//!   failures, using optimistic and cautious set estimates ([`learner`]).

pub mod dynamics;
pub mod error;
pub mod grid;
pub mod ode;
pub mod gp;
pub mod learner;
pub mod oracle;

pub use dynamics::{Dynamics, TransitionOutcome};
pub use error::{DynamicsError, GpError, GridError, IntegratorError, LearnerError, OracleError};
pub use gp::{exceed_probability, GpPosterior, KernelParams, Matern, PriorMean};
pub use grid::{AxisGrid, Domain, FieldCsv, IndicatorField, ProductGrid, ScalarField, Snapped};
pub use learner::{
    compute_sets, estimated_measure, learn, select_action, tabular_learn, tabular_sample_budget,
    LearnSetup, LearnTrace, SampleRecord, SetEstimates, Snapshot, ThresholdSchedule,
    ThresholdValues,
};
pub use oracle::{
    compute_measure, compute_q_measure, compute_viable, ground_truth, longest_unviable_horizon,
    rollout_audit, GroundTruth, HorizonAnalysis, ViableSets};
