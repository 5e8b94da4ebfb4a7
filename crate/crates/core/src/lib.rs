//! Optimistic least-squares value iteration with linear features: finite
//! episodic MDPs, exact dynamic-programming oracles, an inherent Bellman error
//! estimator, learning agents, and a regret harness.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod envs;
pub mod harness;
pub mod numerics;
pub mod oracle;
pub mod rng;

pub use agents::{
    AgentError, EleanorAgent, EleanorConfig, EpisodicAgent, GramState, MisLinUcb, PlannerConfig, RadiusConfig,
    UniformRandom,
};
pub use envs::{EnvError, EpisodicLinearMDP, FeatureMap, ParamBall, RewardNoise, Transition};
pub use harness::{ExperimentConfig, HarnessError};
pub use numerics::{LinalgError, SpdMatrix};
pub use oracle::{exact_dp, evaluate_policy, ibe_profile, IbeEntry, IbeOptions, OracleError, PolicyTable};
