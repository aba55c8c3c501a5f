//! Scoring learned set estimates against oracle ground truth.

use serde::{Deserialize, Serialize};
use viability::grid::{IndicatorField, ScalarField};
use viability::learner::LearnTrace;

use crate::AppError;

/// Precision/recall of one estimated set against the true viable set.
/// Both are `None` (undefined, not 1.0) when the respective denominator is
/// empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetScore {
    pub estimated_cells: usize,
    pub true_cells: usize,
    pub intersection_cells: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

impl SetScore {
    pub fn compute(estimate: &IndicatorField, truth: &IndicatorField) -> Result<Self, AppError> {
        estimate
            .check_compatible(truth)
            .map_err(|e| AppError::Runtime(format!("scoring: {e}")))?;
        let mut intersection = 0usize;
        for (e, t) in estimate.values().iter().zip(truth.values()) {
            if *e && *t {
                intersection += 1;
            }
        }
        let estimated = estimate.count_true();
        let truth_count = truth.count_true();
        Ok(Self {
            estimated_cells: estimated,
            true_cells: truth_count,
            intersection_cells: intersection,
            precision: (estimated > 0).then(|| intersection as f64 / estimated as f64),
            recall: (truth_count > 0).then(|| intersection as f64 / truth_count as f64),
        })
    }
}

/// Final report of one learning run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub total_samples: usize,
    pub failure_count: usize,
    /// Failures divided by total samples over the whole run.
    pub failure_rate: f64,
    pub cautious: SetScore,
    pub optimistic: SetScore,
    /// Mean absolute measure error over the true viability kernel.
    pub measure_mae: f64,
    /// Wall-clock time; reported separately in `run_info.json` so that the
    /// score file stays byte-identical across repeated runs.
    #[serde(skip)]
    pub runtime_secs: f64,
}

pub fn score_trace(
    trace: &LearnTrace,
    oracle_q_v: &IndicatorField,
    oracle_lambda: &ScalarField,
    oracle_s_v: &IndicatorField,
) -> Result<ScoreReport, AppError> {
    let snapshot = trace.final_snapshot();
    let cautious = SetScore::compute(&snapshot.q_caut, oracle_q_v)?;
    let optimistic = SetScore::compute(&snapshot.q_opt, oracle_q_v)?;
    snapshot
        .measure
        .check_compatible(oracle_lambda)
        .map_err(|e| AppError::Runtime(format!("scoring: {e}")))?;
    let mut err_sum = 0.0;
    let mut kernel_cells = 0usize;
    for s in 0..oracle_lambda.len() {
        if oracle_s_v.get(s) {
            err_sum += (snapshot.measure.get(s) - oracle_lambda.get(s)).abs();
            kernel_cells += 1;
        }
    }
    Ok(ScoreReport {
        total_samples: trace.records.len(),
        failure_count: trace.failure_count,
        failure_rate: trace.failure_count as f64 / trace.records.len() as f64,
        cautious,
        optimistic,
        measure_mae: if kernel_cells > 0 { err_sum / kernel_cells as f64 } else { 0.0 },
        runtime_secs: 0.0,
    })
}
