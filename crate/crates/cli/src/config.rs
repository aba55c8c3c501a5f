//! Experiment configuration: one TOML file is the single source of truth
//! for a run. Unknown keys are rejected, and every value is validated
//! against the preconditions of the module that consumes it.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use viability::dynamics::{Hovership, HovershipParams, Slip, SlipParams, ToyModel};
use viability::gp::{KernelParams, Matern, PriorMean};
use viability::grid::{AxisGrid, ProductGrid};
use viability::learner::ThresholdSchedule;
use viability::Dynamics;

use crate::AppError;

/// Environment variable that overrides `experiment.output_dir`.
pub const OUTPUT_DIR_ENV: &str = "VIAB_OUT";

fn default_snapshots() -> Vec<usize> {
    vec![50, 250, 500]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub grid: GridSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hovership: Option<HovershipSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slip: Option<SlipSection>,
    pub gp: GpSection,
    pub schedule: ScheduleSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub system: SystemId,
    pub seed: u64,
    pub samples: usize,
    pub initial_state: Vec<f64>,
    pub output_dir: PathBuf,
    /// Sample counts at which to keep set snapshots; counts beyond
    /// `samples` are ignored. The final state is always kept.
    #[serde(default = "default_snapshots")]
    pub snapshots: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemId {
    Toy,
    Hovership,
    Slip,
}

impl std::fmt::Display for SystemId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SystemId::Toy => write!(f, "toy"),
            SystemId::Hovership => write!(f, "hovership"),
            SystemId::Slip => write!(f, "slip"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub state: Vec<AxisSection>,
    pub action: Vec<AxisSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub lower: f64,
    pub upper: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HovershipSection {
    pub g0: f64,
    pub gravity: f64,
    pub max_thrust: f64,
    pub crash_height: f64,
    pub control_frequency: f64,
}

impl Default for HovershipSection {
    fn default() -> Self {
        let p = HovershipParams::default();
        Self {
            g0: p.g0,
            gravity: p.g,
            max_thrust: p.a_max,
            crash_height: p.s_max,
            control_frequency: p.omega,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlipSection {
    pub gravity: f64,
    pub mass: f64,
    pub stiffness: f64,
    pub resting_length: f64,
    pub total_energy: f64,
}

impl Default for SlipSection {
    fn default() -> Self {
        let p = SlipParams::default();
        Self {
            gravity: p.gravity,
            mass: p.mass,
            stiffness: p.stiffness,
            resting_length: p.resting_length,
            total_energy: 1860.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpSection {
    pub lengthscales: Vec<f64>,
    pub signal_variance: f64,
    pub noise_variance: f64,
    pub smoothness: Smoothness,
    pub prior: PriorSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothness {
    #[serde(rename = "1/2")]
    Half,
    #[serde(rename = "3/2")]
    ThreeHalves,
    #[serde(rename = "5/2")]
    FiveHalves,
}

impl From<Smoothness> for Matern {
    fn from(s: Smoothness) -> Matern {
        match s {
            Smoothness::Half => Matern::Half,
            Smoothness::ThreeHalves => Matern::ThreeHalves,
            Smoothness::FiveHalves => Matern::FiveHalves,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase", tag = "kind")]
pub enum PriorSection {
    Constant {
        value: f64,
    },
    Bump {
        center: Vec<f64>,
        widths: Vec<f64>,
        amplitude: f64,
        offset: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub gamma_opt: [f64; 2],
    pub gamma_caut: [f64; 2],
    pub lambda_caut: [f64; 2],
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            AppError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        let config: Self = toml::from_str(&text)
            .map_err(|e| AppError::Validation(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    /// Cross-field validation beyond what the schema enforces.
    pub fn validate(&self) -> Result<(), AppError> {
        let err = |msg: String| Err(AppError::Validation(msg));
        if self.experiment.samples == 0 {
            return err("experiment.samples must be >= 1".into());
        }
        match self.experiment.system {
            SystemId::Toy | SystemId::Hovership | SystemId::Slip => {
                if self.grid.state.len() != 1 || self.grid.action.len() != 1 {
                    return err(format!(
                        "grid: system `{}` needs exactly 1 state and 1 action axis",
                        self.experiment.system
                    ));
                }
            }
        }
        if self.hovership.is_some() && self.experiment.system != SystemId::Hovership {
            return err(format!(
                "[hovership] section present but experiment.system = {}",
                self.experiment.system
            ));
        }
        if self.slip.is_some() && self.experiment.system != SystemId::Slip {
            return err(format!(
                "[slip] section present but experiment.system = {}",
                self.experiment.system
            ));
        }
        for (i, ax) in self.grid.state.iter().chain(&self.grid.action).enumerate() {
            AxisGrid::new(ax.lower, ax.upper, ax.cells).map_err(|e| {
                AppError::Validation(format!("grid axis {i}: {e}"))
            })?;
        }
        if self.experiment.initial_state.len() != self.grid.state.len() {
            return err(format!(
                "experiment.initial_state has {} entries but the grid has {} state axes",
                self.experiment.initial_state.len(),
                self.grid.state.len()
            ));
        }
        for (x, ax) in self.experiment.initial_state.iter().zip(&self.grid.state) {
            if !(ax.lower..=ax.upper).contains(x) {
                return err(format!(
                    "experiment.initial_state {x} outside grid axis [{}, {}]",
                    ax.lower, ax.upper
                ));
            }
        }
        self.build_grid()?;
        self.build_dynamics()?;
        self.build_kernel()?;
        self.build_prior()?;
        self.build_schedule()?;
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Arc<ProductGrid>, AppError> {
        let axes = |list: &[AxisSection]| -> Result<Vec<AxisGrid>, AppError> {
            list.iter()
                .map(|ax| {
                    AxisGrid::new(ax.lower, ax.upper, ax.cells)
                        .map_err(|e| AppError::Validation(format!("grid: {e}")))
                })
                .collect()
        };
        let state = axes(&self.grid.state)?;
        let action = axes(&self.grid.action)?;
        let grid = if self.experiment.system == SystemId::Toy {
            ProductGrid::new_discrete(state, action)
        } else {
            ProductGrid::new(state, action)
        };
        Ok(Arc::new(grid.map_err(|e| AppError::Validation(format!("grid: {e}")))?))
    }

    pub fn build_dynamics(&self) -> Result<Box<dyn Dynamics>, AppError> {
        match self.experiment.system {
            SystemId::Toy => Ok(Box::new(ToyModel::default())),
            SystemId::Hovership => {
                let s = self.hovership.clone().unwrap_or_default();
                let params = HovershipParams {
                    g0: s.g0,
                    g: s.gravity,
                    a_max: s.max_thrust,
                    s_max: s.crash_height,
                    omega: s.control_frequency,
                };
                Ok(Box::new(Hovership::new(params).map_err(|e| {
                    AppError::Validation(format!("[hovership]: {e}"))
                })?))
            }
            SystemId::Slip => {
                let s = self.slip.clone().unwrap_or_default();
                let params = SlipParams {
                    gravity: s.gravity,
                    mass: s.mass,
                    stiffness: s.stiffness,
                    resting_length: s.resting_length,
                };
                Ok(Box::new(Slip::new(params, s.total_energy).map_err(|e| {
                    AppError::Validation(format!("[slip]: {e}"))
                })?))
            }
        }
    }

    pub fn build_kernel(&self) -> Result<KernelParams, AppError> {
        let expected = self.grid.state.len() + self.grid.action.len();
        if self.gp.lengthscales.len() != expected {
            return Err(AppError::Validation(format!(
                "gp.lengthscales has {} entries but the grid has {expected} axes",
                self.gp.lengthscales.len()
            )));
        }
        KernelParams::new(
            self.gp.lengthscales.clone(),
            self.gp.signal_variance,
            self.gp.smoothness.into(),
        )
        .map_err(|e| AppError::Validation(format!("gp: {e}")))
    }

    pub fn build_prior(&self) -> Result<PriorMean, AppError> {
        let prior = match &self.gp.prior {
            PriorSection::Constant { value } => PriorMean::Constant(*value),
            PriorSection::Bump { center, widths, amplitude, offset } => PriorMean::Bump {
                center: center.clone(),
                widths: widths.clone(),
                amplitude: *amplitude,
                offset: *offset,
            },
        };
        prior
            .validate(self.grid.state.len() + self.grid.action.len())
            .map_err(|e| AppError::Validation(format!("gp.prior: {e}")))?;
        Ok(prior)
    }

    pub fn build_schedule(&self) -> Result<ThresholdSchedule, AppError> {
        ThresholdSchedule::new(
            (self.schedule.gamma_opt[0], self.schedule.gamma_opt[1]),
            (self.schedule.gamma_caut[0], self.schedule.gamma_caut[1]),
            (self.schedule.lambda_caut[0], self.schedule.lambda_caut[1]),
            self.experiment.samples,
        )
        .map_err(|e| AppError::Validation(format!("schedule: {e}")))
    }

    /// Snapshot checkpoints restricted to the run length.
    pub fn snapshot_checkpoints(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .experiment
            .snapshots
            .iter()
            .copied()
            .filter(|&s| s >= 1 && s <= self.experiment.samples)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Output directory after applying the environment override (the `--out`
    /// flag is applied by the caller and wins over both).
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.experiment.output_dir.clone(),
        }
    }
}
