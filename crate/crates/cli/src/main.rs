//! `eleanor`: run regret experiments, parameter sweeps, IBE estimates, and
//! the planner check from the command line.
//!
//! Exit codes: 0 on success, 2 on configuration errors, 1 on runtime errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use eleanor_core::harness::{
    default_window, fit_scaling, oracle_check, parse_env_arg, run_experiment, run_sweep, ExperimentConfig,
    HarnessError, OracleCheckConfig, SweepConfig,
};
use eleanor_core::oracle::{ibe_profile, IbeOptions};

#[derive(Debug, Parser)]
#[command(name = "eleanor", version, about = "Optimistic least-squares value iteration experiments")]
struct Cli {
    /// Replace the config's seed list with this single seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replace the config's episode count.
    #[arg(long, global = true)]
    episodes: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment; writes per-seed and aggregate CSVs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `output_dir` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a parameter grid; writes sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the inherent Bellman error per step; CSV on stdout.
    Ibe {
        /// Env file path, or `generator:key=value,...`
        /// (e.g. `linear:d=3,n_states=6,n_actions=2,horizon=3,seed=7`).
        #[arg(long)]
        env: String,
        /// Number of random next-step parameters per step.
        #[arg(long, default_value_t = IbeOptions::default().budget)]
        budget: usize,
    },
    /// Compare the planner against the grid oracle on random instances.
    OracleCheck {
        /// JSON options; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode, HarnessError> {
    match &cli.command {
        Command::Run { config, out } => run(cli, config, out.as_deref()),
        Command::Sweep { config, out } => sweep(cli, config, out.as_deref()),
        Command::Ibe { env, budget } => ibe(cli, env, *budget),
        Command::OracleCheck { config } => check(cli, config.as_deref()),
    }
}

fn output_dir(flag: Option<&Path>, from_config: Option<&Path>) -> Result<PathBuf, HarnessError> {
    flag.or(from_config)
        .map(Path::to_path_buf)
        .ok_or_else(|| HarnessError::Config("no output directory: pass --out or set output_dir".into()))
}

fn run(cli: &Cli, path: &Path, out: Option<&Path>) -> Result<ExitCode, HarnessError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(k) = cli.episodes {
        cfg.episodes = k;
    }
    cfg.validate()?;
    let dir = output_dir(out, cfg.output_dir.as_deref())?;
    let result = run_experiment(&cfg, Some(&dir))?;
    for curve in &result.curves {
        println!("seed {}: cumulative regret {:.4}", curve.seed, curve.final_regret());
    }
    let mean = result.mean_curve();
    let fit = fit_scaling(&mean, default_window(cfg.episodes));
    println!("mean cumulative regret {:.4}", mean.last().copied().unwrap_or(0.0));
    match &fit.flag {
        None => println!("scaling slope {:.4} on episodes [{}, {}]", fit.slope, fit.window.0, fit.window.1),
        Some(why) => println!("scaling slope unavailable: {why}"),
    }
    println!("wrote {}", dir.display());
    Ok(ExitCode::SUCCESS)
}

fn sweep(cli: &Cli, path: &Path, out: Option<&Path>) -> Result<ExitCode, HarnessError> {
    let mut cfg = SweepConfig::load(path)?;
    if let serde_json::Value::Object(base) = &mut cfg.base {
        if let Some(seed) = cli.seed {
            base.insert("seeds".into(), serde_json::json!([seed]));
        }
        if let Some(k) = cli.episodes {
            base.insert("episodes".into(), serde_json::json!(k));
        }
    }
    let dir = output_dir(out, cfg.output_dir.as_deref())?;
    let cells = run_sweep(&cfg, Some(&dir))?;
    let failed = cells.iter().filter(|c| c.error.is_some()).count();
    println!("{} cells, {failed} failed; wrote {}", cells.len(), dir.join("sweep.csv").display());
    Ok(ExitCode::SUCCESS)
}

fn ibe(cli: &Cli, env_arg: &str, budget: usize) -> Result<ExitCode, HarnessError> {
    let spec = parse_env_arg(env_arg)?;
    let seed = cli.seed.unwrap_or(0);
    let env = spec.build(seed)?;
    let opts = IbeOptions { seed, ..IbeOptions::with_budget(budget) };
    println!("t,ihat,inner_gap,budget");
    for entry in ibe_profile(&env, &opts) {
        println!("{},{:.16e},{:.16e},{}", entry.t + 1, entry.ihat, entry.inner_gap, entry.budget);
    }
    Ok(ExitCode::SUCCESS)
}

fn check(cli: &Cli, path: Option<&Path>) -> Result<ExitCode, HarnessError> {
    let mut cfg = match path {
        Some(p) => OracleCheckConfig::load(p)?,
        None => OracleCheckConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let report = oracle_check(&cfg)?;
    println!("{:>5}  {:<10} {:>14} {:>14} {:>11}  result", "inst", "dims", "planner", "grid", "diff");
    for r in &report.rows {
        let dims = r.dims.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        println!(
            "{:>5}  {:<10} {:>14.8} {:>14.8} {:>11.3e}  {}",
            r.index,
            dims,
            r.plan_value,
            r.grid_value,
            r.diff,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    println!(
        "{}/{} passed (need {}); {} within tolerance both ways",
        report.passed,
        report.rows.len(),
        report.required,
        report.within_both_ways
    );
    Ok(if report.ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
