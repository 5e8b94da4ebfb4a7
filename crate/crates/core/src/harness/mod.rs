//! Experiment orchestration: configs, seeded replications with exact regret,
//! aggregate curves, scaling fits, parameter sweeps, and the planner check.

mod config;
mod oracle_check;
mod run;
mod scaling;
mod sweep;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::agents::AgentError;
use crate::envs::EnvError;
use crate::oracle::OracleError;

pub use config::{parse_env_arg, AgentName, AgentSpec, EnvSpec, ExperimentConfig};
pub use oracle_check::{oracle_check, OracleCheckConfig, OracleCheckReport, OracleCheckRow};
pub use run::{
    aggregate, percentile, run_experiment, run_seed, write_aggregate_csv, write_seed_csv, AggregateRow, CurveRow,
    ExperimentResult, SeedCurve,
};
pub use scaling::{default_window, fit_scaling, ScalingFit};
pub use sweep::{run_sweep, Axis, SweepCell, SweepConfig};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl HarnessError {
    /// Whether the error comes from the user's input rather than a run.
    pub fn is_config_error(&self) -> bool {
        matches!(self, HarnessError::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}
