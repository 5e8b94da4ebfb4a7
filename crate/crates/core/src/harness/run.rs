use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::envs::EpisodicLinearMDP;
use crate::oracle::{evaluate_policy, exact_dp};
use crate::rng::{self, StreamKind};

use super::config::{AgentSpec, ExperimentConfig};
use super::{io_err, Result};

/// One episode of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub episode: usize,
    pub per_episode_regret: f64,
    pub cumulative_regret: f64,
    /// Optimistic start value of the episode's plan (`None` for agents that
    /// do not plan).
    pub planned_value: Option<f64>,
    pub vstar: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedCurve {
    pub seed: u64,
    pub rows: Vec<CurveRow>,
}

impl SeedCurve {
    pub fn cumulative(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.cumulative_regret).collect()
    }

    pub fn final_regret(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cumulative_regret)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub episode: usize,
    pub mean_cum: f64,
    pub regret_p10: f64,
    pub regret_p90: f64,
    pub n_seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub curves: Vec<SeedCurve>,
    pub aggregate: Vec<AggregateRow>,
}

impl ExperimentResult {
    pub fn mean_curve(&self) -> Vec<f64> {
        self.aggregate.iter().map(|r| r.mean_cum).collect()
    }

    pub fn final_regrets(&self) -> Vec<f64> {
        self.curves.iter().map(SeedCurve::final_regret).collect()
    }
}

/// Runs `episodes` episodes of one replication. Transitions at `(k, t)` come
/// from the stream `(seed, Transition, [k, t])`; regret is exact.
pub fn run_seed(
    env: &EpisodicLinearMDP,
    agent: &AgentSpec,
    episodes: usize,
    k_max: usize,
    seed: u64,
) -> Result<SeedCurve> {
    let vstar = exact_dp(env).start_value(env);
    let mut learner = agent.build(env, k_max, seed)?;
    let mut rows = Vec::with_capacity(episodes);
    let mut cumulative = 0.0;
    for k in 1..=episodes {
        learner.begin_episode(k)?;
        let value = evaluate_policy(env, learner.policy())?;
        let regret = vstar - value;
        cumulative += regret;
        rows.push(CurveRow {
            episode: k,
            per_episode_regret: regret,
            cumulative_regret: cumulative,
            planned_value: learner.planned_value(),
            vstar,
        });
        let mut s = env.start_state();
        for t in 0..env.horizon() {
            let a = learner.act(t, s)?;
            let mut stream = rng::stream(seed, StreamKind::Transition, &[k as u64, t as u64]);
            let tr = env.sample_step(t, s, a, &mut stream)?;
            learner.observe(&tr)?;
            s = tr.next_state;
        }
    }
    Ok(SeedCurve { seed, rows })
}

/// Linear-interpolation percentile (`q` in `[0, 1]`) of unsorted data.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

/// Per-episode mean and 10th/90th percentiles of cumulative regret.
pub fn aggregate(curves: &[SeedCurve]) -> Vec<AggregateRow> {
    let Some(first) = curves.first() else { return Vec::new() };
    (0..first.rows.len())
        .map(|i| {
            let cum: Vec<f64> = curves.iter().map(|c| c.rows[i].cumulative_regret).collect();
            AggregateRow {
                episode: first.rows[i].episode,
                mean_cum: cum.iter().sum::<f64>() / cum.len() as f64,
                regret_p10: percentile(&cum, 0.1),
                regret_p90: percentile(&cum, 0.9),
                n_seeds: cum.len(),
            }
        })
        .collect()
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_seed_csv(curve: &SeedCurve, path: &Path) -> Result<()> {
    let mut out = String::from("episode,per_episode_regret,cumulative_regret,planned_value,vstar\n");
    for r in &curve.rows {
        let planned = r.planned_value.map_or_else(|| "nan".to_string(), num);
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.episode,
            num(r.per_episode_regret),
            num(r.cumulative_regret),
            planned,
            num(r.vstar)
        );
    }
    std::fs::write(path, out).map_err(io_err(path))
}

pub fn write_aggregate_csv(rows: &[AggregateRow], path: &Path) -> Result<()> {
    let mut out = String::from("episode,mean_cum,regret_p10,regret_p90,n_seeds\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.episode, num(r.mean_cum), num(r.regret_p10), num(r.regret_p90), r.n_seeds);
    }
    std::fs::write(path, out).map_err(io_err(path))
}

/// Runs every seed (in parallel) and, when `out_dir` is given, writes
/// `seed_<seed>.csv` per replication and `aggregate.csv`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<ExperimentResult> {
    cfg.validate()?;
    let k_max = cfg.k_max();
    let curves = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let env = cfg.env.build(seed)?;
            run_seed(&env, &cfg.agent, cfg.episodes, k_max, seed)
        })
        .collect::<Result<Vec<_>>>()?;
    let aggregate = aggregate(&curves);
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        for curve in &curves {
            write_seed_csv(curve, &dir.join(format!("seed_{}.csv", curve.seed)))?;
        }
        write_aggregate_csv(&aggregate, &dir.join("aggregate.csv"))?;
    }
    Ok(ExperimentResult { curves, aggregate })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_interpolates() {
        let v = [3.0, 1.0, 2.0, 4.0, 5.0];
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 1.0), 5.0);
        assert_eq!(percentile(&v, 0.5), 3.0);
        assert!((percentile(&v, 0.1) - 1.4).abs() < 1e-12);
        assert_eq!(percentile(&[7.0], 0.9), 7.0);
    }

    #[test]
    fn aggregate_by_hand() {
        let curve = |seed, xs: &[f64]| SeedCurve {
            seed,
            rows: xs
                .iter()
                .enumerate()
                .map(|(i, &c)| CurveRow {
                    episode: i + 1,
                    per_episode_regret: 0.0,
                    cumulative_regret: c,
                    planned_value: None,
                    vstar: 1.0,
                })
                .collect(),
        };
        let agg = aggregate(&[curve(0, &[1.0, 2.0]), curve(1, &[3.0, 6.0])]);
        assert_eq!(agg.len(), 2);
        assert_eq!(agg[1].mean_cum, 4.0);
        assert!((agg[1].regret_p10 - 2.4).abs() < 1e-12);
        assert!((agg[1].regret_p90 - 5.6).abs() < 1e-12);
        assert_eq!(agg[1].n_seeds, 2);
    }
}
