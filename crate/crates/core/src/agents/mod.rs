//! Learning agents and the optimistic planner.
//!
//! Every agent follows the same episodic lifecycle: `begin_episode(k)` with
//! `k = 1, 2, ...`, then for `t = 0..H` one `act(t, s)` followed by one
//! `observe(transition)`. Calls out of order are errors.

mod baselines;
mod eleanor;
mod gram;
mod linucb;
mod planner;
mod radius;

use thiserror::Error;

use crate::envs::{EnvError, Transition};
use crate::numerics::LinalgError;
use crate::oracle::PolicyTable;

pub use baselines::UniformRandom;
pub use eleanor::{EleanorAgent, EleanorConfig};
pub use gram::{lsq_center, GramState, NextStep, Sample};
pub use linucb::{BanditAgent, MisLinUcb};
pub use planner::{
    eleanor_plan, grid_oracle_plan, grid_points, random_plan_instance, ucb_scores, EllipsoidParam, Plan,
    PlanInputs, PlanInstance, PlannerConfig, MAX_GRID_DIM,
};
pub use radius::{radius, RadiusConfig, RadiusInputs};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid agent configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("lifecycle error: {0}")]
    Lifecycle(String),
    #[error("grid oracle needs sum of dims <= {max}, got {total}")]
    GridBudget { total: usize, max: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Env(#[from] EnvError),
}

pub type Result<T> = std::result::Result<T, AgentError>;

pub trait EpisodicAgent {
    fn begin_episode(&mut self, k: usize) -> Result<()>;
    fn act(&mut self, t: usize, s: usize) -> Result<usize>;
    fn observe(&mut self, transition: &Transition) -> Result<()>;
    /// Deterministic policy executed in the current episode.
    fn policy(&self) -> &PolicyTable;
    /// Optimistic start-state value of the current plan, if the agent plans.
    fn planned_value(&self) -> Option<f64> {
        None
    }
}

/// Tracks the begin / act / observe order shared by all agents.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Lifecycle {
    horizon: usize,
    episode: usize,
    phase: Phase,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Idle,
    /// Waiting for `act(t, _)`.
    Act(usize),
    /// Waiting for `observe` of step `t` taken in state `s` with action `a`.
    Observe(usize, usize, usize),
}

impl Lifecycle {
    pub(crate) fn new(horizon: usize) -> Self {
        Self { horizon, episode: 0, phase: Phase::Idle }
    }

    pub(crate) fn begin(&mut self, k: usize) -> Result<()> {
        if self.phase != Phase::Idle {
            return Err(AgentError::Lifecycle(format!("begin_episode({k}) while episode {} is running", self.episode)));
        }
        if k != self.episode + 1 {
            return Err(AgentError::Lifecycle(format!("expected episode {}, got {k}", self.episode + 1)));
        }
        self.episode = k;
        self.phase = Phase::Act(0);
        Ok(())
    }

    pub(crate) fn check_act(&self, t: usize) -> Result<()> {
        match self.phase {
            Phase::Act(expected) if expected == t => Ok(()),
            other => Err(AgentError::Lifecycle(format!("act(t={t}) in phase {other:?}"))),
        }
    }

    pub(crate) fn acted(&mut self, t: usize, s: usize, a: usize) {
        self.phase = Phase::Observe(t, s, a);
    }

    pub(crate) fn observed(&mut self, tr: &Transition) -> Result<()> {
        match self.phase {
            Phase::Observe(t, s, a) if (tr.t, tr.s, tr.a) == (t, s, a) => {
                self.phase = if t + 1 == self.horizon { Phase::Idle } else { Phase::Act(t + 1) };
                Ok(())
            }
            other => Err(AgentError::Lifecycle(format!(
                "observe(t={}, s={}, a={}) in phase {other:?}",
                tr.t, tr.s, tr.a
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(t: usize, s: usize, a: usize) -> Transition {
        Transition { t, s, a, reward: 0.0, next_state: 0 }
    }

    #[test]
    fn lifecycle_order() {
        let mut lc = Lifecycle::new(2);
        assert!(lc.check_act(0).is_err());
        assert!(lc.begin(2).is_err());
        lc.begin(1).unwrap();
        assert!(lc.begin(2).is_err());
        assert!(lc.check_act(1).is_err());
        lc.check_act(0).unwrap();
        lc.acted(0, 0, 1);
        assert!(lc.observed(&tr(0, 0, 0)).is_err());
        lc.observed(&tr(0, 0, 1)).unwrap();
        lc.check_act(1).unwrap();
        lc.acted(1, 0, 0);
        assert!(lc.check_act(1).is_err());
        lc.observed(&tr(1, 0, 0)).unwrap();
        lc.begin(2).unwrap();
        assert_eq!(lc.episode, 2);
    }
}
