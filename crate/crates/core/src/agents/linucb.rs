use crate::envs::{EpisodicLinearMDP, FeatureMap, Transition};
use crate::oracle::{argmax, PolicyTable};

use super::gram::{center_from_moments, GramState};
use super::planner::ucb_scores;
use super::radius::{radius, RadiusConfig, RadiusInputs};
use super::{AgentError, EpisodicAgent, Lifecycle, Result};

/// LinUCB with the misspecification inflation in its radius. With
/// `ibe_term = 0` (or `c3 = 0`) it is plain LinUCB.
#[derive(Debug, Clone)]
pub struct MisLinUcb {
    gram: GramState,
    cfg: RadiusConfig,
    ball_radius: f64,
    k_max: usize,
    rounds: usize,
}

impl MisLinUcb {
    pub fn new(dim: usize, cfg: RadiusConfig, ball_radius: f64, k_max: usize) -> Result<Self> {
        cfg.validate()?;
        if k_max == 0 {
            return Err(AgentError::InvalidConfig("k_max must be at least 1".into()));
        }
        Ok(Self { gram: GramState::new(dim, 1, cfg.lambda)?, cfg, ball_radius, k_max, rounds: 0 })
    }

    /// Rounds observed so far; the next decision is round `rounds() + 1`.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn gram(&self) -> &GramState {
        &self.gram
    }

    pub fn theta_hat(&self) -> Vec<f64> {
        center_from_moments(&self.gram, None)
    }

    /// Radius used for round `k`.
    pub fn radius(&self, k: usize) -> f64 {
        let at =
            RadiusInputs { horizon: 1, t: 0, dim: self.gram.dim(), ball_radius: self.ball_radius, k, k_max: self.k_max };
        radius(&self.cfg, &at)
    }

    /// Upper confidence scores for the next round.
    pub fn scores(&self, actions: &[Vec<f64>]) -> Result<Vec<f64>> {
        ucb_scores(self.gram.sigma(), &self.theta_hat(), self.radius(self.rounds + 1), actions)
    }

    /// Highest score, lowest index on ties.
    pub fn choose(&self, actions: &[Vec<f64>]) -> Result<usize> {
        Ok(argmax(self.scores(actions)?).0)
    }

    pub fn update(&mut self, action: usize, phi: &[f64], reward: f64) -> Result<()> {
        let tr = Transition { t: 0, s: 0, a: action, reward, next_state: 0 };
        self.gram.push(tr, phi)?;
        self.rounds += 1;
        Ok(())
    }
}

/// [`MisLinUcb`] driven through the episodic interface on a one-step env.
#[derive(Debug, Clone)]
pub struct BanditAgent {
    inner: MisLinUcb,
    features: FeatureMap,
    start_state: usize,
    lifecycle: Lifecycle,
    policy: PolicyTable,
    value: Option<f64>,
}

impl BanditAgent {
    pub fn new(env: &EpisodicLinearMDP, cfg: RadiusConfig, k_max: usize) -> Result<Self> {
        if env.horizon() != 1 {
            return Err(AgentError::InvalidConfig(format!("LinUCB needs horizon 1, got {}", env.horizon())));
        }
        let inner = MisLinUcb::new(env.features().dim(0), cfg, env.balls().radius(0), k_max)?;
        Ok(Self {
            inner,
            features: env.features().clone(),
            start_state: env.start_state(),
            lifecycle: Lifecycle::new(1),
            policy: Vec::new(),
            value: None,
        })
    }

    pub fn inner(&self) -> &MisLinUcb {
        &self.inner
    }
}

impl EpisodicAgent for BanditAgent {
    fn begin_episode(&mut self, k: usize) -> Result<()> {
        self.lifecycle.begin(k)?;
        if self.inner.rounds() + 1 != k {
            return Err(AgentError::Lifecycle(format!("episode {k} after {} rounds", self.inner.rounds())));
        }
        let mut row = Vec::with_capacity(self.features.step(0).len());
        for (s, actions) in self.features.step(0).iter().enumerate() {
            let scores = self.inner.scores(actions)?;
            let (a, v) = argmax(scores);
            if s == self.start_state {
                self.value = Some(v);
            }
            row.push(a);
        }
        self.policy = vec![row];
        Ok(())
    }

    fn act(&mut self, t: usize, s: usize) -> Result<usize> {
        self.lifecycle.check_act(t)?;
        let a = *self.policy[0].get(s).ok_or_else(|| AgentError::InvalidConfig(format!("state {s} out of range")))?;
        self.lifecycle.acted(t, s, a);
        Ok(a)
    }

    fn observe(&mut self, tr: &Transition) -> Result<()> {
        self.lifecycle.observed(tr)?;
        let phi = self.features.get(0, tr.s, tr.a).to_vec();
        self.inner.update(tr.a, &phi, tr.reward)
    }

    fn policy(&self) -> &PolicyTable {
        &self.policy
    }

    fn planned_value(&self) -> Option<f64> {
        self.value
    }
}
