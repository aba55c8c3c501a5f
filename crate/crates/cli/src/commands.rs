//! The four subcommands: oracle, learn, sweep, render (rendering itself
//! lives in [`crate::render`]).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use viability::grid::Domain;
use viability::learner::{learn, LearnSetup, LearnTrace, Snapshot};
use viability::oracle;

use crate::config::ExperimentConfig;
use crate::fields::{read_indicator, read_scalar};
use crate::score::{score_trace, ScoreReport};
use crate::AppError;

pub const ORACLE_SUBDIR: &str = "oracle";
pub const LEARN_SUBDIR: &str = "learn";

fn create_dir(path: &Path) -> Result<(), AppError> {
    std::fs::create_dir_all(path)
        .map_err(|e| AppError::Runtime(format!("cannot create {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), AppError> {
    std::fs::write(path, bytes)
        .map_err(|e| AppError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), AppError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| AppError::Runtime(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn write_csv_field<F>(path: &Path, write: F) -> Result<(), AppError>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    write(&mut buf).map_err(|e| AppError::Runtime(format!("{}: {e}", path.display())))?;
    write_file(path, &buf)
}

#[derive(Debug, Serialize)]
struct OracleSummary {
    system: String,
    state_cells: Vec<usize>,
    action_cells: Vec<usize>,
    q_cells: usize,
    viable_q_cells: usize,
    kernel_state_cells: usize,
    sweep_passes: usize,
    max_measure: f64,
}

/// Compute ground truth for the configured system and write the four field
/// CSVs plus a summary. Returns the output directory.
pub fn cmd_oracle(
    config: &ExperimentConfig,
    out_override: Option<&Path>,
) -> Result<PathBuf, AppError> {
    let out = out_override.map(Path::to_path_buf).unwrap_or_else(|| config.output_dir());
    let dir = out.join(ORACLE_SUBDIR);
    create_dir(&dir)?;
    let grid = config.build_grid()?;
    let dynamics = config.build_dynamics()?;
    let t0 = Instant::now();
    let gt = oracle::ground_truth(dynamics.as_ref(), &grid)
        .map_err(|e| AppError::Runtime(format!("oracle: {e}")))?;
    write_csv_field(&dir.join("q_v.csv"), |b| gt.q_v.write_csv(b))?;
    write_csv_field(&dir.join("s_v.csv"), |b| gt.s_v.write_csv(b))?;
    write_csv_field(&dir.join("lambda.csv"), |b| gt.lambda.write_csv(b))?;
    write_csv_field(&dir.join("lambda_q.csv"), |b| gt.lambda_q.write_csv(b))?;
    write_json(
        &dir.join("summary.json"),
        &OracleSummary {
            system: config.experiment.system.to_string(),
            state_cells: grid.state_axes().iter().map(|a| a.num_cells()).collect(),
            action_cells: grid.action_axes().iter().map(|a| a.num_cells()).collect(),
            q_cells: grid.num_q_cells(),
            viable_q_cells: gt.q_v.count_true(),
            kernel_state_cells: gt.s_v.count_true(),
            sweep_passes: gt.passes,
            max_measure: gt.lambda.max_value(),
        },
    )?;
    write_json(
        &dir.join("run_info.json"),
        &serde_json::json!({ "runtime_secs": t0.elapsed().as_secs_f64() }),
    )?;
    Ok(dir)
}

#[derive(Debug, Serialize, Deserialize)]
struct RunInfo {
    seed: u64,
    samples: usize,
    runtime_secs: f64,
}

fn snapshot_stem(snapshot: &Snapshot) -> String {
    format!("snap-{:06}", snapshot.after_samples)
}

fn write_snapshot(dir: &Path, snapshot: &Snapshot) -> Result<(), AppError> {
    let stem = snapshot_stem(snapshot);
    write_csv_field(&dir.join(format!("{stem}-q_opt.csv")), |b| snapshot.q_opt.write_csv(b))?;
    write_csv_field(&dir.join(format!("{stem}-q_caut.csv")), |b| snapshot.q_caut.write_csv(b))?;
    write_csv_field(&dir.join(format!("{stem}-measure.csv")), |b| snapshot.measure.write_csv(b))?;
    write_csv_field(&dir.join(format!("{stem}-mean.csv")), |b| snapshot.mean.write_csv(b))?;
    write_csv_field(&dir.join(format!("{stem}-variance.csv")), |b| {
        snapshot.variance.write_csv(b)
    })?;
    Ok(())
}

fn trace_jsonl(trace: &LearnTrace) -> Result<Vec<u8>, AppError> {
    let mut buf = Vec::new();
    for record in &trace.records {
        let line = serde_json::to_string(record)
            .map_err(|e| AppError::Runtime(format!("trace serialization: {e}")))?;
        buf.extend_from_slice(line.as_bytes());
        buf.push(b'\n');
    }
    Ok(buf)
}

/// Output paths of one learning run.
#[derive(Debug, Clone)]
pub struct LearnOutputs {
    pub run_dir: PathBuf,
    pub report: Option<ScoreReport>,
}

/// Run the active learner with the configured settings and write the trace,
/// snapshots, and (unless `no_score`) a score against previously written
/// oracle files.
pub fn cmd_learn(
    config: &ExperimentConfig,
    seed_override: Option<u64>,
    out_override: Option<&Path>,
    no_score: bool,
) -> Result<LearnOutputs, AppError> {
    let out = out_override.map(Path::to_path_buf).unwrap_or_else(|| config.output_dir());
    let seed = seed_override.unwrap_or(config.experiment.seed);
    let run_dir = out.join(LEARN_SUBDIR).join(format!("seed-{seed}"));
    create_dir(&run_dir)?;

    let grid = config.build_grid()?;
    let dynamics = config.build_dynamics()?;
    let setup = LearnSetup {
        dynamics: dynamics.as_ref(),
        grid: std::sync::Arc::clone(&grid),
        kernel: config.build_kernel()?,
        noise_variance: config.gp.noise_variance,
        prior_mean: config.build_prior()?,
        schedule: config.build_schedule()?,
        initial_state: config.experiment.initial_state.clone(),
        seed,
        snapshot_after: config.snapshot_checkpoints(),
    };

    let t0 = Instant::now();
    let result = learn(&setup);
    let runtime_secs = t0.elapsed().as_secs_f64();

    // flush whatever the learner produced, then surface the error
    let trace = match result {
        Ok(trace) => trace,
        Err(e) => {
            return Err(AppError::Runtime(format!("learn (seed {seed}): {e}")));
        }
    };
    write_file(&run_dir.join("trace.jsonl"), &trace_jsonl(&trace)?)?;
    for snapshot in &trace.snapshots {
        write_snapshot(&run_dir, snapshot)?;
    }
    write_json(
        &run_dir.join("run_info.json"),
        &RunInfo { seed, samples: trace.records.len(), runtime_secs },
    )?;

    let report = if no_score {
        None
    } else {
        let oracle_dir = out.join(ORACLE_SUBDIR);
        if !oracle_dir.join("q_v.csv").exists() {
            return Err(AppError::Runtime(format!(
                "scoring needs oracle files in {}; run `viab oracle` first or pass --no-score",
                oracle_dir.display()
            )));
        }
        let q_v = read_indicator(&oracle_dir.join("q_v.csv"), &grid, Domain::StateActions)?;
        let s_v = read_indicator(&oracle_dir.join("s_v.csv"), &grid, Domain::States)?;
        let lambda = read_scalar(&oracle_dir.join("lambda.csv"), &grid, Domain::States)?;
        let mut report = score_trace(&trace, &q_v, &lambda, &s_v)?;
        report.runtime_secs = runtime_secs;
        write_json(&run_dir.join("score.json"), &report)?;
        Some(report)
    };

    Ok(LearnOutputs { run_dir, report })
}

/// One row of a sweep: either a scored run or the error that stopped it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ScoreReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Median and interquartile range of one metric over the sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricSummary {
    pub count: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

impl MetricSummary {
    /// Quantiles by linear interpolation of the order statistics.
    fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let quantile = |p: f64| -> f64 {
            let idx = p * (sorted.len() - 1) as f64;
            let lo = idx.floor() as usize;
            let hi = idx.ceil() as usize;
            let frac = idx - lo as f64;
            sorted[lo] * (1.0 - frac) + sorted[hi] * frac
        };
        Some(Self {
            count: sorted.len(),
            median: quantile(0.5),
            q1: quantile(0.25),
            q3: quantile(0.75),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepAggregate {
    pub rows: Vec<SweepRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_rate: Option<MetricSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_cautious: Option<MetricSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recall_cautious: Option<MetricSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure_mae: Option<MetricSummary>,
}

/// Run one learning run per seed (in parallel) and aggregate the reports.
/// Individual seed failures are recorded and the sweep continues.
pub fn cmd_sweep(
    config: &ExperimentConfig,
    seeds: &[u64],
    out_override: Option<&Path>,
    no_score: bool,
) -> Result<(PathBuf, SweepAggregate), AppError> {
    if seeds.is_empty() {
        return Err(AppError::Validation("sweep needs at least one seed".into()));
    }
    let mut rows: Vec<SweepRow> = seeds
        .par_iter()
        .map(|&seed| match cmd_learn(config, Some(seed), out_override, no_score) {
            Ok(outputs) => SweepRow { seed, report: outputs.report, error: None },
            Err(e) => SweepRow { seed, report: None, error: Some(e.to_string()) },
        })
        .collect();
    rows.sort_by_key(|r| r.seed);

    let metric = |f: &dyn Fn(&ScoreReport) -> Option<f64>| -> Option<MetricSummary> {
        let values: Vec<f64> =
            rows.iter().filter_map(|r| r.report.as_ref()).filter_map(f).collect();
        MetricSummary::from_values(&values)
    };
    let aggregate = SweepAggregate {
        failure_rate: metric(&|r| Some(r.failure_rate)),
        precision_cautious: metric(&|r| r.cautious.precision),
        recall_cautious: metric(&|r| r.cautious.recall),
        measure_mae: metric(&|r| Some(r.measure_mae)),
        rows,
    };

    let out = out_override.map(Path::to_path_buf).unwrap_or_else(|| config.output_dir());
    let sweep_dir = out.join("sweep");
    create_dir(&sweep_dir)?;
    let path = sweep_dir.join("aggregate.json");
    write_json(&path, &aggregate)?;
    Ok((path, aggregate))
}

/// Parse `--seeds` values: comma-separated integers.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, AppError> {
    let mut seeds = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        seeds.push(part.parse::<u64>().map_err(|_| {
            AppError::Validation(format!("--seeds: `{part}` is not a non-negative integer"))
        })?);
    }
    if seeds.is_empty() {
        return Err(AppError::Validation("--seeds: no seeds given".into()));
    }
    Ok(seeds)
}

/// Print a short human summary of a learn report to stderr-like writer.
pub fn print_report(w: &mut impl Write, report: &ScoreReport) -> std::io::Result<()> {
    writeln!(
        w,
        "samples {}  failures {} ({:.1}%)  cautious precision {} recall {}  measure MAE {:.4}",
        report.total_samples,
        report.failure_count,
        100.0 * report.failure_rate,
        report
            .cautious
            .precision
            .map_or_else(|| "undefined".into(), |v| format!("{v:.3}")),
        report
            .cautious
            .recall
            .map_or_else(|| "undefined".into(), |v| format!("{v:.3}")),
        report.measure_mae,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_parse() {
        assert_eq!(parse_seeds("0,1,2").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds(" 5 , 7 ").unwrap(), vec![5, 7]);
        assert!(parse_seeds("a").is_err());
        assert!(parse_seeds("").is_err());
        assert!(parse_seeds("-1").is_err());
    }

    #[test]
    fn metric_summary_quantiles() {
        let m = MetricSummary::from_values(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.median, 2.5);
        assert_eq!(m.q1, 1.75);
        assert_eq!(m.q3, 3.25);
        let single = MetricSummary::from_values(&[0.4]).unwrap();
        assert_eq!(single.median, 0.4);
        assert_eq!(single.q1, 0.4);
        assert!(MetricSummary::from_values(&[]).is_none());
    }
}
