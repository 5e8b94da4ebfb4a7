use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::{
    BanditAgent, EleanorAgent, EleanorConfig, EpisodicAgent, PlannerConfig, RadiusConfig, UniformRandom,
};
use crate::envs::{self, EpisodicLinearMDP};

use super::{HarnessError, Result};

/// Environment source. Generators without a `seed` use the replication seed,
/// so every replication gets its own instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvSpec {
    /// Random tabular MDP with one-hot features.
    Tabular { n_states: usize, n_actions: usize, horizon: usize, seed: Option<u64> },
    /// Random MDP whose transitions and rewards are linear in the features.
    Linear { d: usize, n_states: usize, n_actions: usize, horizon: usize, seed: Option<u64> },
    /// A `linear` env with a sup-norm `eps` perturbation of its rewards.
    Misspecified { d: usize, n_states: usize, n_actions: usize, horizon: usize, eps: f64, seed: Option<u64> },
    /// Sign-vector bandit with one misspecified arm.
    HardBandit { d: usize, eps: f64, gap: f64 },
    /// Env file written by `EpisodicLinearMDP::save`.
    File { path: PathBuf },
}

impl EnvSpec {
    /// Builds the env; `replication_seed` is used when the spec has no seed.
    pub fn build(&self, replication_seed: u64) -> Result<EpisodicLinearMDP> {
        let cfg = |e: envs::EnvError| HarnessError::Config(format!("env: {e}"));
        match *self {
            EnvSpec::Tabular { n_states, n_actions, horizon, seed } => {
                envs::random_tabular(n_states, n_actions, horizon, seed.unwrap_or(replication_seed)).map_err(cfg)
            }
            EnvSpec::Linear { d, n_states, n_actions, horizon, seed } => {
                envs::make_linear_mdp(d, n_states, n_actions, horizon, seed.unwrap_or(replication_seed)).map_err(cfg)
            }
            EnvSpec::Misspecified { d, n_states, n_actions, horizon, eps, seed } => {
                let seed = seed.unwrap_or(replication_seed);
                let base = envs::make_linear_mdp(d, n_states, n_actions, horizon, seed).map_err(cfg)?;
                envs::make_misspecified(&base, eps, seed).map_err(cfg)
            }
            EnvSpec::HardBandit { d, eps, gap } => envs::make_hard_bandit(d, eps, gap).map_err(cfg),
            EnvSpec::File { ref path } => EpisodicLinearMDP::load(path).map_err(|e| match e {
                envs::EnvError::Io { .. } => HarnessError::Config(format!("env: {e}")),
                other => cfg(other),
            }),
        }
    }
}

/// Parses `name:key=value,...` (e.g. `linear:d=3,n_states=6,n_actions=2,horizon=3,seed=7`)
/// or, when the argument names an existing file, loads it as an env file.
pub fn parse_env_arg(arg: &str) -> Result<EnvSpec> {
    if Path::new(arg).is_file() {
        return Ok(EnvSpec::File { path: PathBuf::from(arg) });
    }
    let (name, rest) = arg.split_once(':').unwrap_or((arg, ""));
    let mut obj = serde_json::Map::new();
    obj.insert("generator".into(), serde_json::Value::String(name.trim().to_string()));
    for pair in rest.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("env spec: expected key=value, got `{pair}`")))?;
        let value = serde_json::from_str(v.trim()).unwrap_or_else(|_| serde_json::Value::String(v.trim().to_string()));
        obj.insert(k.trim().to_string(), value);
    }
    serde_json::from_value(serde_json::Value::Object(obj))
        .map_err(|e| HarnessError::Config(format!("env spec `{arg}`: {e}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentName {
    Eleanor,
    GreedyLsvi,
    Mislinucb,
    UniformRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub name: AgentName,
    #[serde(default)]
    pub radius: RadiusConfig,
    #[serde(default)]
    pub planner: PlannerConfig,
}

impl AgentSpec {
    pub fn build(&self, env: &EpisodicLinearMDP, k_max: usize, seed: u64) -> Result<Box<dyn EpisodicAgent + Send>> {
        let cfg = EleanorConfig { radius: self.radius.clone(), planner: self.planner.clone(), k_max };
        let as_config = |e: crate::agents::AgentError| HarnessError::Config(format!("agent: {e}"));
        Ok(match self.name {
            AgentName::Eleanor => Box::new(EleanorAgent::new(env, cfg, seed).map_err(as_config)?),
            AgentName::GreedyLsvi => Box::new(EleanorAgent::greedy_lsvi(env, cfg, seed).map_err(as_config)?),
            AgentName::Mislinucb => Box::new(BanditAgent::new(env, self.radius.clone(), k_max).map_err(as_config)?),
            AgentName::UniformRandom => Box::new(UniformRandom::new(env, seed)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: EnvSpec,
    pub agent: AgentSpec,
    /// Number of episodes `K`.
    pub episodes: usize,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Episode budget for the confidence split; defaults to `episodes`.
    #[serde(default)]
    pub k_max: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
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

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(HarnessError::Config("episodes must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("seeds must not be empty".into()));
        }
        if self.k_max == Some(0) {
            return Err(HarnessError::Config("k_max must be at least 1".into()));
        }
        self.agent.radius.validate().map_err(|e| HarnessError::Config(format!("agent.radius: {e}")))?;
        self.agent.planner.validate().map_err(|e| HarnessError::Config(format!("agent.planner: {e}")))?;
        Ok(())
    }

    pub fn k_max(&self) -> usize {
        self.k_max.unwrap_or(self.episodes)
    }
}
