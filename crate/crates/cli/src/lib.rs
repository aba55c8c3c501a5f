//! Experiment runner around the viability crate: configuration loading,
//! ground-truth computation, learning runs, seed sweeps, scoring, and
//! snapshot rendering.

pub mod commands;
pub mod config;
pub mod fields;
pub mod render;
pub mod score;

use thiserror::Error;

/// Command errors, split by exit-code category: configuration and argument
/// problems exit with 2, everything else with 3.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Validation(_) => 2,
            AppError::Runtime(_) => 3,
        }
    }
}
