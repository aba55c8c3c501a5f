//! Brute-force ground truth: exhaustive computation of viable sets, safety
//! measures, and unviable horizons on a gridded system.
//!
//! Successor states snap to the nearest grid cell; successors that leave the
//! grid count as unviable unless the step already failed, since an unknown
//! region cannot certify viability.

use std::sync::Arc;

use rayon::prelude::*;

use crate::dynamics::Dynamics;
use crate::error::OracleError;
use crate::grid::{Domain, IndicatorField, ProductGrid, ScalarField};

/// Snapped successor cell per Q cell; `None` when the step failed or left
/// the grid.
pub type SuccessorTable = Vec<Option<usize>>;

/// Exact viable set and viability kernel on a grid.
#[derive(Debug, Clone)]
pub struct ViableSets {
    pub q_v: IndicatorField,
    pub s_v: IndicatorField,
    /// Number of deletion sweeps until the fixed point (including the final
    /// sweep that removes nothing).
    pub passes: usize,
    pub successors: SuccessorTable,
}

/// Everything the oracle can say about a system at one resolution.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub q_v: IndicatorField,
    pub s_v: IndicatorField,
    pub lambda: ScalarField,
    pub lambda_q: ScalarField,
    pub passes: usize,
}

fn step_successor(
    dynamics: &dyn Dynamics,
    grid: &ProductGrid,
    q_cell: usize,
) -> Result<Option<usize>, OracleError> {
    let (s, a) = grid.split_q_index(q_cell);
    let state = grid.state_center(s);
    let action = grid.action_center(a);
    let out = dynamics.step(&state, &action).map_err(|source| OracleError::StepFailed {
        q_cell,
        state: state.clone(),
        action: action.clone(),
        source,
    })?;
    if out.failed {
        return Ok(None);
    }
    let snapped = grid.locate_state(&out.next_state)?;
    if snapped.clamped {
        return Ok(None);
    }
    Ok(Some(snapped.cell))
}

/// Step the dynamics from every Q cell center once.
pub fn successor_table(
    dynamics: &dyn Dynamics,
    grid: &ProductGrid,
) -> Result<SuccessorTable, OracleError> {
    (0..grid.num_q_cells())
        .into_par_iter()
        .map(|q| step_successor(dynamics, grid, q))
        .collect()
}

/// Compute the viable set Q_V and viability kernel S_V by fixed-point
/// deletion: start from all non-failed states and repeatedly remove states
/// with no action whose successor stays inside the candidate set. Sweeps are
/// synchronous, so the result is independent of cell order.
pub fn compute_viable(
    dynamics: &dyn Dynamics,
    grid: &Arc<ProductGrid>,
) -> Result<ViableSets, OracleError> {
    let successors = successor_table(dynamics, grid)?;
    let ns = grid.num_state_cells();
    let na = grid.num_action_cells();

    let mut candidate: Vec<bool> =
        (0..ns).map(|s| !dynamics.is_failure_state(&grid.state_center(s))).collect();
    let mut passes = 0;
    loop {
        passes += 1;
        let next: Vec<bool> = (0..ns)
            .map(|s| {
                candidate[s]
                    && (0..na).any(|a| {
                        successors[grid.q_index(s, a)].is_some_and(|succ| candidate[succ])
                    })
            })
            .collect();
        let changed = next != candidate;
        candidate = next;
        if !changed {
            break;
        }
    }

    let q_values: Vec<bool> =
        successors.iter().map(|succ| succ.is_some_and(|s| candidate[s])).collect();
    let q_v = IndicatorField::from_values(Arc::clone(grid), Domain::StateActions, q_values)?;
    let s_v = q_v.project_to_states()?;
    debug_assert_eq!(s_v.values(), candidate.as_slice());
    Ok(ViableSets { q_v, s_v, passes, successors })
}

/// Safety measure: per state, the measure of its viable action slice.
pub fn compute_measure(q_v: &IndicatorField) -> Result<ScalarField, OracleError> {
    let grid = q_v.grid();
    let values: Vec<f64> = (0..grid.num_state_cells()).map(|s| q_v.slice_measure(s)).collect();
    Ok(ScalarField::from_values(Arc::clone(grid), Domain::States, values)?)
}

/// Q-safety measure: per Q cell, the safety measure at the snapped successor
/// of one dynamics step, and 0 on failure or grid exit.
pub fn compute_q_measure(
    lambda: &ScalarField,
    dynamics: &dyn Dynamics,
    grid: &Arc<ProductGrid>,
) -> Result<ScalarField, OracleError> {
    let successors = successor_table(dynamics, grid)?;
    q_measure_from_successors(lambda, &successors, grid)
}

fn q_measure_from_successors(
    lambda: &ScalarField,
    successors: &SuccessorTable,
    grid: &Arc<ProductGrid>,
) -> Result<ScalarField, OracleError> {
    let values: Vec<f64> =
        successors.iter().map(|succ| succ.map_or(0.0, |s| lambda.get(s))).collect();
    Ok(ScalarField::from_values(Arc::clone(grid), Domain::StateActions, values)?)
}

/// One-pass ground truth: viable sets plus both measures, stepping the
/// dynamics once per Q cell.
pub fn ground_truth(
    dynamics: &dyn Dynamics,
    grid: &Arc<ProductGrid>,
) -> Result<GroundTruth, OracleError> {
    let sets = compute_viable(dynamics, grid)?;
    let lambda = compute_measure(&sets.q_v)?;
    let lambda_q = q_measure_from_successors(&lambda, &sets.successors, grid)?;
    Ok(GroundTruth { q_v: sets.q_v, s_v: sets.s_v, lambda, lambda_q, passes: sets.passes })
}

/// Longest-trajectory horizons over the unviable states of a discrete
/// system.
#[derive(Debug, Clone)]
pub struct HorizonAnalysis {
    /// (state cell, horizon) for every unviable state, ascending by cell.
    pub horizons: Vec<(usize, usize)>,
    pub max_horizon: usize,
}

impl HorizonAnalysis {
    pub fn horizon_of(&self, state_cell: usize) -> Option<usize> {
        self.horizons.iter().find(|(s, _)| *s == state_cell).map(|(_, h)| *h)
    }
}

/// For each unviable state (neither viable nor failed), the length of the
/// longest trajectory before reaching the failure set. Trajectories from
/// unviable states are acyclic, so the horizons are finite; a cycle signals
/// an inconsistent viable set and is reported as an error.
pub fn longest_unviable_horizon(
    dynamics: &dyn Dynamics,
    grid: &Arc<ProductGrid>,
    sets: &ViableSets,
) -> Result<HorizonAnalysis, OracleError> {
    if !dynamics.is_discrete() || !grid.is_discrete() {
        return Err(OracleError::NotDiscrete);
    }
    let ns = grid.num_state_cells();
    let na = grid.num_action_cells();
    let failed: Vec<bool> = (0..ns).map(|s| dynamics.is_failure_state(&grid.state_center(s))).collect();
    let unviable: Vec<bool> = (0..ns).map(|s| !sets.s_v.get(s) && !failed[s]).collect();

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        InProgress,
        Done,
    }
    let mut marks = vec![Mark::New; ns];
    let mut horizon = vec![0usize; ns];

    // iterative DFS; the stack holds (state, next action to expand), and a
    // child's horizon folds into its parent when the child pops
    for start in (0..ns).filter(|&s| unviable[s]) {
        if marks[start] == Mark::Done {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        marks[start] = Mark::InProgress;
        while let Some(top) = stack.len().checked_sub(1) {
            let (s, a) = stack[top];
            if a == na {
                marks[s] = Mark::Done;
                stack.pop();
                if let Some(&(parent, _)) = stack.last() {
                    horizon[parent] = horizon[parent].max(1 + horizon[s]);
                }
                continue;
            }
            stack[top].1 += 1;
            let branch = match sets.successors[grid.q_index(s, a)] {
                None => 1, // immediate failure
                Some(succ) => {
                    if sets.s_v.get(succ) {
                        return Err(OracleError::Inconsistent(format!(
                            "unviable state cell {s} reaches viable cell {succ}"
                        )));
                    }
                    if failed[succ] {
                        1
                    } else {
                        match marks[succ] {
                            Mark::InProgress => {
                                let mut cycle: Vec<usize> =
                                    stack.iter().map(|(st, _)| *st).collect();
                                cycle.push(succ);
                                return Err(OracleError::UnviableCycle(cycle));
                            }
                            Mark::Done => 1 + horizon[succ],
                            Mark::New => {
                                marks[succ] = Mark::InProgress;
                                stack.push((succ, 0));
                                continue;
                            }
                        }
                    }
                }
            };
            horizon[s] = horizon[s].max(branch);
        }
    }

    let horizons: Vec<(usize, usize)> =
        (0..ns).filter(|&s| unviable[s]).map(|s| (s, horizon[s])).collect();
    let max_horizon = horizons.iter().map(|(_, h)| *h).max().unwrap_or(0);
    Ok(HorizonAnalysis { horizons, max_horizon })
}

/// Check that every Q_V cell admits a long failure-free continuation: step
/// from the cell, snap the successor to its cell center, and keep choosing
/// the first viable action for `steps` steps. Returns the first violation.
pub fn rollout_audit(
    dynamics: &dyn Dynamics,
    grid: &Arc<ProductGrid>,
    q_v: &IndicatorField,
    steps: usize,
) -> Result<(), OracleError> {
    let na = grid.num_action_cells();
    let start_cells: Vec<usize> = (0..grid.num_q_cells()).filter(|&q| q_v.get(q)).collect();
    start_cells
        .par_iter()
        .try_for_each(|&q0| -> Result<(), OracleError> {
            let (mut s_cell, mut a_cell) = grid.split_q_index(q0);
            for step in 0..steps {
                let q = grid.q_index(s_cell, a_cell);
                let state = grid.state_center(s_cell);
                let action = grid.action_center(a_cell);
                let out =
                    dynamics.step(&state, &action).map_err(|source| OracleError::StepFailed {
                        q_cell: q,
                        state: state.clone(),
                        action: action.clone(),
                        source,
                    })?;
                if out.failed {
                    return Err(OracleError::Inconsistent(format!(
                        "rollout from Q_V cell {q0} failed at step {step} (cell {q})"
                    )));
                }
                let snapped = grid.locate_state(&out.next_state)?;
                if snapped.clamped {
                    return Err(OracleError::Inconsistent(format!(
                        "rollout from Q_V cell {q0} left the grid at step {step}"
                    )));
                }
                s_cell = snapped.cell;
                a_cell = (0..na)
                    .find(|&a| q_v.get(grid.q_index(s_cell, a)))
                    .ok_or_else(|| {
                        OracleError::Inconsistent(format!(
                            "rollout from Q_V cell {q0} reached state cell {s_cell} with an empty viable slice at step {step}"
                        ))
                    })?;
            }
            Ok(())
        })
}
