//! Model-free active learning of the safety measure: sample the dynamics,
//! regress the measure with a GP, and steer sampling through a cautious set
//! estimate while an optimistic set estimate supplies the regression
//! targets.
//!
//! Also houses the tabular variant for finite discrete systems, whose
//! estimate converges to exactly zero on the complement of the viable set
//! under uniform random sampling.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::Dynamics;
use crate::error::LearnerError;
use crate::gp::{exceed_probability, GpPosterior, KernelParams, PriorMean};
use crate::grid::{Domain, IndicatorField, ProductGrid, ScalarField};
use crate::oracle::compute_measure;

/// Threshold values in force at one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdValues {
    pub gamma_opt: f64,
    pub gamma_caut: f64,
    pub lambda_caut: f64,
}

/// Linear ramps for the three tuning parameters, from start to end over the
/// run. `gamma_caut >= gamma_opt` must hold along the whole ramp so that the
/// cautious set stays nested inside the optimistic set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSchedule {
    gamma_opt: (f64, f64),
    gamma_caut: (f64, f64),
    lambda_caut: (f64, f64),
    num_iterations: usize,
}

impl ThresholdSchedule {
    pub fn new(
        gamma_opt: (f64, f64),
        gamma_caut: (f64, f64),
        lambda_caut: (f64, f64),
        num_iterations: usize,
    ) -> Result<Self, LearnerError> {
        if num_iterations == 0 {
            return Err(LearnerError::InvalidSchedule("need at least one iteration".into()));
        }
        for (name, (start, end)) in
            [("gamma_opt", gamma_opt), ("gamma_caut", gamma_caut), ("lambda_caut", lambda_caut)]
        {
            if !start.is_finite() || !end.is_finite() {
                return Err(LearnerError::InvalidSchedule(format!("{name} must be finite")));
            }
            if end < start {
                return Err(LearnerError::InvalidSchedule(format!(
                    "{name} must ramp upward: start {start} > end {end}"
                )));
            }
        }
        for (name, (start, end)) in [("gamma_opt", gamma_opt), ("gamma_caut", gamma_caut)] {
            if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&end) {
                return Err(LearnerError::InvalidSchedule(format!("{name} must lie in [0, 1]")));
            }
        }
        if lambda_caut.0 < 0.0 {
            return Err(LearnerError::InvalidSchedule("lambda_caut must be >= 0".into()));
        }
        if gamma_caut.0 < gamma_opt.0 || gamma_caut.1 < gamma_opt.1 {
            return Err(LearnerError::InvalidSchedule(
                "gamma_caut must dominate gamma_opt so the cautious set nests inside the optimistic set"
                    .into(),
            ));
        }
        Ok(Self { gamma_opt, gamma_caut, lambda_caut, num_iterations })
    }

    pub fn num_iterations(&self) -> usize {
        self.num_iterations
    }

    /// Thresholds at an iteration; clamps past the last ramp step.
    pub fn at(&self, iteration: usize) -> ThresholdValues {
        let frac = if self.num_iterations > 1 {
            iteration.min(self.num_iterations - 1) as f64 / (self.num_iterations - 1) as f64
        } else {
            0.0
        };
        let lerp = |(start, end): (f64, f64)| start + (end - start) * frac;
        ThresholdValues {
            gamma_opt: lerp(self.gamma_opt),
            gamma_caut: lerp(self.gamma_caut),
            lambda_caut: lerp(self.lambda_caut),
        }
    }
}

/// Posterior evaluated on the working grid, thresholded into the optimistic
/// and cautious set estimates.
#[derive(Debug, Clone)]
pub struct SetEstimates {
    pub mean: ScalarField,
    pub variance: ScalarField,
    pub q_opt: IndicatorField,
    pub q_caut: IndicatorField,
    pub thresholds: ThresholdValues,
}

/// Evaluate the posterior on every Q cell center and threshold the
/// exceedance probabilities into the two set estimates.
pub fn compute_sets(
    posterior: &GpPosterior,
    grid: &Arc<ProductGrid>,
    thresholds: ThresholdValues,
) -> Result<SetEstimates, LearnerError> {
    let centers: Vec<Vec<f64>> = (0..grid.num_q_cells()).map(|q| grid.q_center(q)).collect();
    let predictions = posterior.predict_many(&centers)?;
    let mut mean = Vec::with_capacity(predictions.len());
    let mut variance = Vec::with_capacity(predictions.len());
    let mut opt = Vec::with_capacity(predictions.len());
    let mut caut = Vec::with_capacity(predictions.len());
    for &(mu, var) in &predictions {
        mean.push(mu);
        variance.push(var);
        opt.push(exceed_probability(mu, var, 0.0) > thresholds.gamma_opt);
        caut.push(exceed_probability(mu, var, thresholds.lambda_caut) > thresholds.gamma_caut);
    }
    Ok(SetEstimates {
        mean: ScalarField::from_values(Arc::clone(grid), Domain::StateActions, mean)?,
        variance: ScalarField::from_values(Arc::clone(grid), Domain::StateActions, variance)?,
        q_opt: IndicatorField::from_values(Arc::clone(grid), Domain::StateActions, opt)?,
        q_caut: IndicatorField::from_values(Arc::clone(grid), Domain::StateActions, caut)?,
        thresholds,
    })
}

/// Measure estimate at a state: the measure of the optimistic action slice.
pub fn estimated_measure(q_opt: &IndicatorField, state_cell: usize) -> f64 {
    q_opt.slice_measure(state_cell)
}

/// Pick the sampling action at a state: the cautious action with the largest
/// posterior variance, or, if no cautious action exists, the action most
/// likely to satisfy the cautious level. Ties go to the lowest action index.
pub fn select_action(state_cell: usize, sets: &SetEstimates) -> usize {
    let grid = sets.q_opt.grid();
    let na = grid.num_action_cells();
    let mut best_cautious: Option<(usize, f64)> = None;
    for a in 0..na {
        let q = grid.q_index(state_cell, a);
        if sets.q_caut.get(q) {
            let v = sets.variance.get(q);
            if best_cautious.is_none_or(|(_, bv)| v > bv) {
                best_cautious = Some((a, v));
            }
        }
    }
    if let Some((a, _)) = best_cautious {
        return a;
    }
    let mut best = (0usize, f64::NEG_INFINITY);
    for a in 0..na {
        let q = grid.q_index(state_cell, a);
        let p = exceed_probability(
            sets.mean.get(q),
            sets.variance.get(q),
            sets.thresholds.lambda_caut,
        );
        if p > best.1 {
            best = (a, p);
        }
    }
    best.0
}

/// How one failed sample was followed up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResetRecord {
    /// State cell the run was reset to, when a cautious state existed.
    pub state_cell: Option<usize>,
    /// True when no state had a cautious action and the run fell back to
    /// the initial state.
    pub fallback: bool,
}

/// One iteration of the learning loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub iteration: usize,
    pub state: Vec<f64>,
    pub state_cell: usize,
    pub action: Vec<f64>,
    pub action_cell: usize,
    pub next_state: Vec<f64>,
    pub failed: bool,
    /// Measure value written to the training set for this sample.
    pub target: f64,
    pub thresholds: ThresholdValues,
    pub reset: Option<ResetRecord>,
}

/// Set estimates retained at a checkpoint.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub after_samples: usize,
    pub thresholds: ThresholdValues,
    pub q_opt: IndicatorField,
    pub q_caut: IndicatorField,
    /// Estimated measure per state (optimistic slice measures).
    pub measure: ScalarField,
    pub mean: ScalarField,
    pub variance: ScalarField,
}

/// Full record of a learning run.
#[derive(Debug, Clone)]
pub struct LearnTrace {
    pub records: Vec<SampleRecord>,
    pub snapshots: Vec<Snapshot>,
    pub failure_count: usize,
    pub fallback_resets: usize,
}

impl LearnTrace {
    /// The snapshot taken after the last sample.
    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots.last().expect("learn always records a final snapshot")
    }

    pub fn failure_rate(&self) -> f64 {
        self.failure_count as f64 / self.records.len() as f64
    }
}

/// Inputs of a learning run. The number of samples is the schedule length.
pub struct LearnSetup<'a> {
    pub dynamics: &'a dyn Dynamics,
    pub grid: Arc<ProductGrid>,
    pub kernel: KernelParams,
    pub noise_variance: f64,
    pub prior_mean: PriorMean,
    pub schedule: ThresholdSchedule,
    pub initial_state: Vec<f64>,
    pub seed: u64,
    /// Sample counts after which to keep a snapshot; the final state is
    /// always kept.
    pub snapshot_after: Vec<usize>,
}

/// Run the active-sampling loop: compute set estimates, take the selected
/// action, record the outcome (target 0 on failure), refit the posterior,
/// and continue from the next state, resetting to a random cautious state
/// after failures.
pub fn learn(setup: &LearnSetup<'_>) -> Result<LearnTrace, LearnerError> {
    let grid = &setup.grid;
    let n = setup.schedule.num_iterations();
    if setup.kernel.dim() != grid.q_dim() {
        return Err(LearnerError::InvalidConfig(format!(
            "kernel has {} lengthscales but the grid has {} axes",
            setup.kernel.dim(),
            grid.q_dim()
        )));
    }
    if setup.initial_state.len() != grid.state_dim() {
        return Err(LearnerError::InvalidConfig("initial state has the wrong dimension".into()));
    }
    if grid.locate_state(&setup.initial_state)?.clamped {
        return Err(LearnerError::InvalidConfig("initial state lies outside the grid".into()));
    }
    for &after in &setup.snapshot_after {
        if after == 0 || after > n {
            return Err(LearnerError::InvalidConfig(format!(
                "snapshot checkpoint {after} outside 1..={n}"
            )));
        }
    }

    let mut rng = ChaCha12Rng::seed_from_u64(setup.seed);
    let mut posterior = GpPosterior::fit(
        Vec::new(),
        setup.kernel.clone(),
        setup.noise_variance,
        setup.prior_mean.clone(),
    )?;
    let mut state = setup.initial_state.clone();
    let mut records = Vec::with_capacity(n);
    let mut snapshots = Vec::new();
    let mut failure_count = 0;
    let mut fallback_resets = 0;

    for i in 0..n {
        let thresholds = setup.schedule.at(i);
        let sets = compute_sets(&posterior, grid, thresholds)?;
        let state_cell = grid.locate_state(&state)?.cell;
        let action_cell = select_action(state_cell, &sets);
        let action = grid.action_center(action_cell);
        let outcome = setup
            .dynamics
            .step(&state, &action)
            .map_err(|source| LearnerError::StepFailed { iteration: i, source })?;

        let mut sample_q = state.clone();
        sample_q.extend_from_slice(&action);

        let (target, reset, next) = if outcome.failed {
            failure_count += 1;
            // reset to a random state whose cautious slice is non-empty
            let candidates: Vec<usize> = (0..grid.num_state_cells())
                .filter(|&s| (0..grid.num_action_cells()).any(|a| sets.q_caut.get(grid.q_index(s, a))))
                .collect();
            let (reset, next) = if candidates.is_empty() {
                fallback_resets += 1;
                (
                    ResetRecord { state_cell: None, fallback: true },
                    setup.initial_state.clone(),
                )
            } else {
                let cell = candidates[rng.random_range(0..candidates.len())];
                (
                    ResetRecord { state_cell: Some(cell), fallback: false },
                    grid.state_center(cell),
                )
            };
            (0.0, Some(reset), next)
        } else {
            let snapped = grid.locate_state(&outcome.next_state)?;
            let target = estimated_measure(&sets.q_opt, snapped.cell);
            // successors outside the grid continue from the boundary cell
            // they snapped to, keeping the walk on the working grid
            let next = if snapped.clamped {
                grid.state_center(snapped.cell)
            } else {
                outcome.next_state.clone()
            };
            (target, None, next)
        };

        records.push(SampleRecord {
            iteration: i,
            state: state.clone(),
            state_cell,
            action: action.clone(),
            action_cell,
            next_state: outcome.next_state,
            failed: outcome.failed,
            target,
            thresholds,
            reset,
        });

        posterior = posterior.with_observation(sample_q, target)?;
        state = next;

        let after = i + 1;
        if after == n || setup.snapshot_after.contains(&after) {
            let th = setup.schedule.at(after.min(n - 1));
            let sets = compute_sets(&posterior, grid, th)?;
            snapshots.push(Snapshot {
                after_samples: after,
                thresholds: th,
                measure: compute_measure(&sets.q_opt)
                    .map_err(|e| LearnerError::InvalidConfig(e.to_string()))?,
                q_opt: sets.q_opt,
                q_caut: sets.q_caut,
                mean: sets.mean,
                variance: sets.variance,
            });
        }
    }

    Ok(LearnTrace { records, snapshots, failure_count, fallback_resets })
}

/// Tabular estimate of the Q-measure for a finite discrete system under
/// uniform random sampling, starting from the optimistic upper bound (the
/// full action count). Each sample is overwritten with 0 on failure and with
/// the current measure estimate of its successor otherwise.
pub fn tabular_learn(
    dynamics: &dyn Dynamics,
    grid: &Arc<ProductGrid>,
    num_samples: usize,
    seed: u64,
) -> Result<ScalarField, LearnerError> {
    if !dynamics.is_discrete() || !grid.is_discrete() {
        return Err(LearnerError::NotDiscrete);
    }
    let ns = grid.num_state_cells();
    let na = grid.num_action_cells();
    let mut estimate = vec![na as f64; ns * na];
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for i in 0..num_samples {
        let q = rng.random_range(0..ns * na);
        let (s, a) = grid.split_q_index(q);
        let outcome = dynamics
            .step(&grid.state_center(s), &grid.action_center(a))
            .map_err(|source| LearnerError::StepFailed { iteration: i, source })?;
        estimate[q] = if outcome.failed {
            0.0
        } else {
            let snapped = grid.locate_state(&outcome.next_state)?;
            if snapped.clamped {
                return Err(LearnerError::InvalidConfig(
                    "discrete successor left the grid".into(),
                ));
            }
            // counting measure of the successor's positive slice
            (0..na).filter(|&a2| estimate[grid.q_index(snapped.cell, a2)] > 0.0).count() as f64
        };
    }
    Ok(ScalarField::from_values(Arc::clone(grid), Domain::StateActions, estimate)?)
}

/// Sample budget under which uniform random sampling covers every Q cell in
/// each of `max_horizon + 1` consecutive phases, except with probability at
/// most `miss_probability`. Coverage per phase is what the tabular
/// convergence argument needs, one phase per horizon level plus one for the
/// viable-to-unviable boundary.
pub fn tabular_sample_budget(
    max_horizon: usize,
    num_q_cells: usize,
    miss_probability: f64,
) -> usize {
    let phases = max_horizon + 1;
    let m = num_q_cells as f64;
    let per_phase = (m * (m * phases as f64 / miss_probability).ln()).ceil() as usize;
    phases * per_phase
}
