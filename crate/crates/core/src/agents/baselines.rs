use rand::Rng;

use crate::envs::{EpisodicLinearMDP, Transition};
use crate::oracle::PolicyTable;
use crate::rng::{self, StreamKind};

use super::{EpisodicAgent, Lifecycle, Result};

/// Draws a fresh uniformly random deterministic policy every episode, so each
/// executed action is uniform over the action set.
#[derive(Debug, Clone)]
pub struct UniformRandom {
    horizon: usize,
    n_states: usize,
    n_actions: usize,
    seed: u64,
    lifecycle: Lifecycle,
    policy: PolicyTable,
}

impl UniformRandom {
    pub fn new(env: &EpisodicLinearMDP, seed: u64) -> Self {
        Self {
            horizon: env.horizon(),
            n_states: env.n_states(),
            n_actions: env.n_actions(),
            seed,
            lifecycle: Lifecycle::new(env.horizon()),
            policy: Vec::new(),
        }
    }
}

impl EpisodicAgent for UniformRandom {
    fn begin_episode(&mut self, k: usize) -> Result<()> {
        self.lifecycle.begin(k)?;
        let mut stream = rng::stream(self.seed, StreamKind::Policy, &[k as u64]);
        self.policy = (0..self.horizon)
            .map(|_| (0..self.n_states).map(|_| stream.random_range(0..self.n_actions)).collect())
            .collect();
        Ok(())
    }

    fn act(&mut self, t: usize, s: usize) -> Result<usize> {
        self.lifecycle.check_act(t)?;
        let a = self.policy[t][s];
        self.lifecycle.acted(t, s, a);
        Ok(a)
    }

    fn observe(&mut self, tr: &Transition) -> Result<()> {
        self.lifecycle.observed(tr)
    }

    fn policy(&self) -> &PolicyTable {
        &self.policy
    }
}
