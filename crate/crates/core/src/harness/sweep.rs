use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::ExperimentConfig;
use super::run::run_experiment;
use super::scaling::{default_window, fit_scaling};
use super::{io_err, HarnessError, Result};

/// One grid dimension. Every value is written to all `paths` (JSON pointers
/// into the base config), so one axis can move several fields together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    pub paths: Vec<String>,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// An experiment config; cells are patched copies of it.
    pub base: Value,
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        for axis in &cfg.axes {
            if axis.paths.is_empty() || axis.values.is_empty() {
                return Err(HarnessError::Config(format!("axis `{}` needs at least one path and one value", axis.name)));
            }
        }
        Ok(cfg)
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

    /// Axis value indices of every cell, last axis varying fastest.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        let mut cells = vec![Vec::new()];
        for axis in &self.axes {
            cells = cells
                .into_iter()
                .flat_map(|prefix| {
                    (0..axis.values.len()).map(move |i| {
                        let mut c = prefix.clone();
                        c.push(i);
                        c
                    })
                })
                .collect();
        }
        cells
    }

    /// The experiment config of one cell.
    pub fn cell_config(&self, cell: &[usize]) -> Result<ExperimentConfig> {
        let mut doc = self.base.clone();
        for (axis, &i) in self.axes.iter().zip(cell) {
            for path in &axis.paths {
                set_pointer(&mut doc, path, axis.values[i].clone())?;
            }
        }
        let cfg: ExperimentConfig = serde_json::from_value(doc).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn set_pointer(doc: &mut Value, pointer: &str, value: Value) -> Result<()> {
    let bad = || HarnessError::Config(format!("sweep path `{pointer}` does not name an object field"));
    let (parent, key) = pointer.rsplit_once('/').ok_or_else(bad)?;
    let key = key.replace("~1", "/").replace("~0", "~");
    match doc.pointer_mut(parent) {
        Some(Value::Object(map)) => {
            map.insert(key, value);
            Ok(())
        }
        _ => Err(bad()),
    }
}

/// Summary of one sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub index: usize,
    pub params: Vec<(String, Value)>,
    pub final_regret_mean: f64,
    pub final_regret_std: f64,
    /// Scaling slope of the mean curve over the default window.
    pub slope: f64,
    pub error: Option<String>,
}

fn run_cell(cfg: &SweepConfig, index: usize, cell: &[usize], out_dir: Option<&Path>) -> SweepCell {
    let params = cfg.axes.iter().zip(cell).map(|(a, &i)| (a.name.clone(), a.values[i].clone())).collect();
    let outcome = cfg.cell_config(cell).and_then(|exp| {
        let dir = out_dir.map(|d| d.join(format!("cell_{index}")));
        let result = run_experiment(&exp, dir.as_deref())?;
        Ok((exp.episodes, result))
    });
    match outcome {
        Ok((episodes, result)) => {
            let finals = result.final_regrets();
            let n = finals.len() as f64;
            let mean = finals.iter().sum::<f64>() / n;
            let var = if finals.len() > 1 {
                finals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            let fit = fit_scaling(&result.mean_curve(), default_window(episodes));
            SweepCell { index, params, final_regret_mean: mean, final_regret_std: var.sqrt(), slope: fit.slope, error: None }
        }
        Err(e) => SweepCell {
            index,
            params,
            final_regret_mean: f64::NAN,
            final_regret_std: f64::NAN,
            slope: f64::NAN,
            error: Some(e.to_string()),
        },
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn value_field(v: &Value) -> String {
    match v {
        Value::String(s) => csv_field(s),
        other => csv_field(&other.to_string()),
    }
}

/// Runs every cell (in parallel). A failing cell records its error and the
/// others still run. Writes `sweep.csv` (and per-cell run outputs under
/// `cell_<i>/`) when `out_dir` is given.
pub fn run_sweep(cfg: &SweepConfig, out_dir: Option<&Path>) -> Result<Vec<SweepCell>> {
    let cells = cfg.cells();
    let results: Vec<SweepCell> =
        cells.par_iter().enumerate().map(|(i, cell)| run_cell(cfg, i, cell, out_dir)).collect();
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut out = String::from("cell");
        for axis in &cfg.axes {
            out.push(',');
            out.push_str(&csv_field(&axis.name));
        }
        out.push_str(",final_regret_mean,final_regret_std,slope,error\n");
        for r in &results {
            let _ = write!(out, "{}", r.index);
            for (_, v) in &r.params {
                let _ = write!(out, ",{}", value_field(v));
            }
            let _ = writeln!(
                out,
                ",{:.16e},{:.16e},{:.16e},{}",
                r.final_regret_mean,
                r.final_regret_std,
                r.slope,
                csv_field(r.error.as_deref().unwrap_or(""))
            );
        }
        let path = dir.join("sweep.csv");
        std::fs::write(&path, out).map_err(io_err(&path))?;
    }
    Ok(results)
}
