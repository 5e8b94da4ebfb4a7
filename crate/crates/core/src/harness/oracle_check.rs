use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{eleanor_plan, grid_oracle_plan, random_plan_instance, PlannerConfig};

use super::{HarnessError, Result};

/// Planner-versus-grid comparison on random small instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleCheckConfig {
    pub instances: usize,
    pub seed: u64,
    pub max_horizon: usize,
    pub max_dim: usize,
    /// Upper bound on the total number of samples per instance.
    pub max_samples: usize,
    pub resolution: usize,
    /// An instance passes when the planner is at most this far below the grid.
    pub tolerance: f64,
    /// Fraction of instances that must pass.
    pub required_fraction: f64,
    pub planner: PlannerConfig,
}

impl Default for OracleCheckConfig {
    fn default() -> Self {
        Self {
            instances: 100,
            seed: 0,
            max_horizon: 3,
            max_dim: 2,
            max_samples: 50,
            resolution: 33,
            tolerance: 1e-3,
            required_fraction: 0.95,
            planner: PlannerConfig::default(),
        }
    }
}

impl OracleCheckConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheckRow {
    pub index: usize,
    pub dims: Vec<usize>,
    pub plan_value: f64,
    pub grid_value: f64,
    /// `plan_value - grid_value`.
    pub diff: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheckReport {
    pub rows: Vec<OracleCheckRow>,
    pub passed: usize,
    /// Instances with `|plan - grid| <= tolerance` (two-sided).
    pub within_both_ways: usize,
    pub required: usize,
}

impl OracleCheckReport {
    pub fn ok(&self) -> bool {
        self.passed >= self.required
    }
}

pub fn oracle_check(cfg: &OracleCheckConfig) -> Result<OracleCheckReport> {
    let rows = (0..cfg.instances)
        .into_par_iter()
        .map(|i| {
            let inst = random_plan_instance(cfg.seed, i as u64, cfg.max_horizon, cfg.max_dim, cfg.max_samples)?;
            let inputs = inst.inputs();
            let plan = eleanor_plan(&inputs, &cfg.planner, cfg.seed, &[u64::MAX, i as u64])?;
            let grid = grid_oracle_plan(&inputs, cfg.resolution)?;
            let diff = plan.value - grid;
            Ok(OracleCheckRow {
                index: i,
                dims: inst.features.dims().to_vec(),
                plan_value: plan.value,
                grid_value: grid,
                diff,
                pass: diff >= -cfg.tolerance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = rows.iter().filter(|r| r.pass).count();
    let within_both_ways = rows.iter().filter(|r| r.diff.abs() <= cfg.tolerance).count();
    let required = (cfg.required_fraction * cfg.instances as f64).ceil() as usize;
    Ok(OracleCheckReport { rows, passed, within_both_ways, required })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_check_passes() {
        let cfg = OracleCheckConfig { instances: 6, resolution: 9, max_horizon: 2, ..OracleCheckConfig::default() };
        let report = oracle_check(&cfg).unwrap();
        assert_eq!(report.rows.len(), 6);
        assert_eq!(report.required, 6);
        assert!(report.ok(), "{report:?}");
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(OracleCheckConfig::from_json(r#"{"instances": 3}"#).is_ok());
        assert!(OracleCheckConfig::from_json(r#"{"instance": 3}"#).is_err());
    }
}
