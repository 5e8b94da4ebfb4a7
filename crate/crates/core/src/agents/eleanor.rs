use serde::{Deserialize, Serialize};

use crate::envs::{EpisodicLinearMDP, FeatureMap, Transition};
use crate::oracle::PolicyTable;

use super::gram::GramState;
use super::planner::{eleanor_plan, Plan, PlanInputs, PlannerConfig};
use super::radius::{radius, RadiusConfig, RadiusInputs};
use super::{AgentError, EpisodicAgent, Lifecycle, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EleanorConfig {
    #[serde(default)]
    pub radius: RadiusConfig,
    #[serde(default)]
    pub planner: PlannerConfig,
    /// Episode budget used in the confidence split.
    pub k_max: usize,
}

impl EleanorConfig {
    pub fn new(k_max: usize) -> Self {
        Self { radius: RadiusConfig::default(), planner: PlannerConfig::default(), k_max }
    }
}

/// Backward least squares with one optimistic program per episode.
#[derive(Debug, Clone)]
pub struct EleanorAgent {
    features: FeatureMap,
    start_state: usize,
    balls: Vec<f64>,
    cfg: EleanorConfig,
    seed: u64,
    grams: Vec<GramState>,
    lifecycle: Lifecycle,
    radii: Vec<f64>,
    plan: Option<Plan>,
    policy: PolicyTable,
}

impl EleanorAgent {
    /// `seed` keys the planner's restart draws.
    pub fn new(env: &EpisodicLinearMDP, cfg: EleanorConfig, seed: u64) -> Result<Self> {
        cfg.radius.validate()?;
        cfg.planner.validate()?;
        if cfg.k_max == 0 {
            return Err(AgentError::InvalidConfig("k_max must be at least 1".into()));
        }
        let features = env.features().clone();
        let grams = (0..env.horizon())
            .map(|t| GramState::new(features.dim(t), env.n_states(), cfg.radius.lambda))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            start_state: env.start_state(),
            balls: env.balls().radii().to_vec(),
            radii: vec![0.0; env.horizon()],
            lifecycle: Lifecycle::new(env.horizon()),
            plan: None,
            policy: Vec::new(),
            features,
            cfg,
            seed,
            grams,
        })
    }

    /// Least-squares value iteration without optimism: the same agent with
    /// every radius multiplier set to zero.
    pub fn greedy_lsvi(env: &EpisodicLinearMDP, cfg: EleanorConfig, seed: u64) -> Result<Self> {
        let cfg = EleanorConfig { radius: cfg.radius.zeroed(), ..cfg };
        Self::new(env, cfg, seed)
    }

    pub fn config(&self) -> &EleanorConfig {
        &self.cfg
    }

    pub fn grams(&self) -> &[GramState] {
        &self.grams
    }

    /// Radii of the current episode.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn plan(&self) -> Option<&Plan> {
        self.plan.as_ref()
    }
}

impl EpisodicAgent for EleanorAgent {
    fn begin_episode(&mut self, k: usize) -> Result<()> {
        self.lifecycle.begin(k)?;
        let horizon = self.grams.len();
        for t in 0..horizon {
            let at = RadiusInputs {
                horizon,
                t,
                dim: self.features.dim(t),
                ball_radius: self.balls[t],
                k,
                k_max: self.cfg.k_max,
            };
            self.radii[t] = radius(&self.cfg.radius, &at);
        }
        let inputs =
            PlanInputs { grams: &self.grams, radii: &self.radii, features: &self.features, start_state: self.start_state };
        let plan = eleanor_plan(&inputs, &self.cfg.planner, self.seed, &[k as u64])?;
        self.policy = plan.greedy_policy(&self.features, self.start_state);
        self.plan = Some(plan);
        Ok(())
    }

    fn act(&mut self, t: usize, s: usize) -> Result<usize> {
        self.lifecycle.check_act(t)?;
        let a = *self.policy[t].get(s).ok_or_else(|| AgentError::InvalidConfig(format!("state {s} out of range")))?;
        self.lifecycle.acted(t, s, a);
        Ok(a)
    }

    fn observe(&mut self, tr: &Transition) -> Result<()> {
        self.lifecycle.observed(tr)?;
        let phi = self.features.get(tr.t, tr.s, tr.a).to_vec();
        self.grams[tr.t].push(*tr, &phi)
    }

    fn policy(&self) -> &PolicyTable {
        &self.policy
    }

    fn planned_value(&self) -> Option<f64> {
        self.plan.as_ref().map(|p| p.value)
    }
}
