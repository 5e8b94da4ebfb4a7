//! Finite episodic MDPs with per-step linear feature maps, the generators used
//! by the experiments, and the canonical JSON env file.
//!
//! Steps are 0-based in code: `t` ranges over `0..horizon`, and the value at
//! step `t` lies in `[0, horizon - t]` because rewards are in `[0, 1]`.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::norm2;
use crate::rng::{self, Stream, StreamKind};

/// Tolerance for probability rows summing to one.
pub const PROB_TOL: f64 = 1e-12;
/// Slack allowed on the unit feature-norm bound.
pub const FEATURE_NORM_TOL: f64 = 1e-12;
/// Largest sign-vector dimension `make_hard_bandit` will enumerate.
pub const MAX_HARD_BANDIT_DIM: usize = 12;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("transition row p[{t}][{s}][{a}] is not a distribution (sum {sum}, min {min})")]
    InvalidProbabilityRow { t: usize, s: usize, a: usize, sum: f64, min: f64 },
    #[error("reward r[{t}][{s}][{a}] = {value} is outside [0, 1]")]
    RewardOutOfRange { t: usize, s: usize, a: usize, value: f64 },
    #[error("{what} index {index} out of range (bound {bound})")]
    IndexOutOfRange { what: &'static str, index: usize, bound: usize },
    #[error("feature phi[{t}][{s}][{a}] has norm {norm} > 1")]
    FeatureNorm { t: usize, s: usize, a: usize, norm: f64 },
    #[error("ball radius at step {t} must be positive, got {value}")]
    BallRadius { t: usize, value: f64 },
    #[error("malformed tables: {0}")]
    Shape(String),
    #[error("infeasible dimensions: {0}")]
    InfeasibleDimensions(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("env file parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, EnvError>;

/// `[t][s][a]` table of scalars.
pub type StepTable = Vec<Vec<Vec<f64>>>;

/// Per-step feature tables `phi[t][s][a]`, with dimension `d_t` at step `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    dims: Vec<usize>,
    phi: Vec<Vec<Vec<Vec<f64>>>>,
}

impl FeatureMap {
    pub fn new(dims: Vec<usize>, phi: Vec<Vec<Vec<Vec<f64>>>>) -> Result<Self> {
        if dims.len() != phi.len() {
            return Err(EnvError::Shape(format!(
                "{} feature dims for {} steps",
                dims.len(),
                phi.len()
            )));
        }
        for (t, (&d, table)) in dims.iter().zip(&phi).enumerate() {
            if d == 0 {
                return Err(EnvError::Shape(format!("feature dim at step {t} is zero")));
            }
            for (s, row) in table.iter().enumerate() {
                for (a, v) in row.iter().enumerate() {
                    if v.len() != d {
                        return Err(EnvError::Shape(format!(
                            "phi[{t}][{s}][{a}] has length {}, expected {d}",
                            v.len()
                        )));
                    }
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(EnvError::Shape(format!("phi[{t}][{s}][{a}] is not finite")));
                    }
                    let norm = norm2(v);
                    if norm > 1.0 + FEATURE_NORM_TOL {
                        return Err(EnvError::FeatureNorm { t, s, a, norm });
                    }
                }
            }
        }
        Ok(Self { dims, phi })
    }

    pub fn horizon(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self, t: usize) -> usize {
        self.dims[t]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn get(&self, t: usize, s: usize, a: usize) -> &[f64] {
        &self.phi[t][s][a]
    }

    /// Feature vectors of every action at `(t, s)`.
    pub fn actions(&self, t: usize, s: usize) -> &[Vec<f64>] {
        &self.phi[t][s]
    }

    pub fn step(&self, t: usize) -> &[Vec<Vec<f64>>] {
        &self.phi[t]
    }

    /// All `(s, a)` feature rows at step `t`, state-major.
    pub fn rows(&self, t: usize) -> Vec<&[f64]> {
        self.phi[t].iter().flat_map(|r| r.iter().map(Vec::as_slice)).collect()
    }
}

/// Radii `D_t` of the per-step parameter balls.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBall {
    radii: Vec<f64>,
}

impl ParamBall {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        for (t, &r) in radii.iter().enumerate() {
            if !(r > 0.0 && r.is_finite()) {
                return Err(EnvError::BallRadius { t, value: r });
            }
        }
        Ok(Self { radii })
    }

    /// `D_t = sqrt(d_t) * (H - t)` for 0-based `t`.
    pub fn default_for(dims: &[usize]) -> Self {
        let h = dims.len();
        Self { radii: dims.iter().enumerate().map(|(t, &d)| (d as f64).sqrt() * (h - t) as f64).collect() }
    }

    pub fn radius(&self, t: usize) -> f64 {
        self.radii[t]
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
}

/// Observation noise added to the mean reward table when sampling.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardNoise {
    #[default]
    None,
    /// Uniform on `[-half_width, half_width]`.
    Uniform { half_width: f64 },
    /// Reward is Bernoulli with the table value as its mean.
    Bernoulli,
}

/// Exact low-rank structure `p = <phi, mu>`, `r = <phi, eta>` recorded by the
/// linear generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearStructure {
    /// `mu[t][j][s']`: base next-state distribution of anchor `j`.
    pub mu: Vec<Vec<Vec<f64>>>,
    /// `eta[t][j]`: reward of anchor `j`.
    pub eta: Vec<Vec<f64>>,
}

/// Generator bookkeeping carried in the env file under `meta`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvMeta {
    pub generator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub reward_noise: RewardNoise,
    /// Factor applied to raw features to enforce the unit-norm bound.
    #[serde(default = "one")]
    pub feature_scale: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<LinearStructure>,
    /// Reward perturbation applied by `make_misspecified`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<StepTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bumped_action: Option<usize>,
}

fn one() -> f64 {
    1.0
}

/// One environment interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub t: usize,
    pub s: usize,
    pub a: usize,
    pub reward: f64,
    pub next_state: usize,
}

/// Finite episodic MDP with linear features. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodicLinearMDP {
    horizon: usize,
    n_states: usize,
    n_actions: usize,
    start_state: usize,
    features: FeatureMap,
    transitions: Vec<Vec<Vec<Vec<f64>>>>,
    rewards: StepTable,
    balls: ParamBall,
    meta: EnvMeta,
}

impl EpisodicLinearMDP {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_states: usize,
        n_actions: usize,
        start_state: usize,
        features: FeatureMap,
        transitions: Vec<Vec<Vec<Vec<f64>>>>,
        rewards: StepTable,
        balls: ParamBall,
        meta: EnvMeta,
    ) -> Result<Self> {
        let horizon = features.horizon();
        if horizon == 0 || n_states == 0 || n_actions == 0 {
            return Err(EnvError::Shape("horizon, states and actions must be positive".into()));
        }
        if start_state >= n_states {
            return Err(EnvError::IndexOutOfRange { what: "start state", index: start_state, bound: n_states });
        }
        if balls.radii().len() != horizon {
            return Err(EnvError::Shape(format!("{} ball radii for horizon {horizon}", balls.radii().len())));
        }
        check_step_shape("features", features.phi.iter().map(|x| x.len()), features.phi.iter().flatten().map(Vec::len), horizon, n_states, n_actions)?;
        check_step_shape("transitions", transitions.iter().map(Vec::len), transitions.iter().flatten().map(Vec::len), horizon, n_states, n_actions)?;
        check_step_shape("rewards", rewards.iter().map(Vec::len), rewards.iter().flatten().map(Vec::len), horizon, n_states, n_actions)?;
        validate_transitions(&transitions, n_states)?;
        validate_rewards(&rewards)?;
        Ok(Self { horizon, n_states, n_actions, start_state, features, transitions, rewards, balls, meta })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
    pub fn n_states(&self) -> usize {
        self.n_states
    }
    pub fn n_actions(&self) -> usize {
        self.n_actions
    }
    pub fn start_state(&self) -> usize {
        self.start_state
    }
    pub fn features(&self) -> &FeatureMap {
        &self.features
    }
    pub fn balls(&self) -> &ParamBall {
        &self.balls
    }
    pub fn meta(&self) -> &EnvMeta {
        &self.meta
    }
    pub fn reward(&self, t: usize, s: usize, a: usize) -> f64 {
        self.rewards[t][s][a]
    }
    pub fn rewards(&self) -> &StepTable {
        &self.rewards
    }
    pub fn transition(&self, t: usize, s: usize, a: usize) -> &[f64] {
        &self.transitions[t][s][a]
    }
    pub fn transitions(&self) -> &[Vec<Vec<Vec<f64>>>] {
        &self.transitions
    }

    /// Upper end of the value range at step `t`.
    pub fn value_range(&self, t: usize) -> f64 {
        (self.horizon - t) as f64
    }

    fn check_index(&self, t: usize, s: usize, a: usize) -> Result<()> {
        if t >= self.horizon {
            return Err(EnvError::IndexOutOfRange { what: "step", index: t, bound: self.horizon });
        }
        if s >= self.n_states {
            return Err(EnvError::IndexOutOfRange { what: "state", index: s, bound: self.n_states });
        }
        if a >= self.n_actions {
            return Err(EnvError::IndexOutOfRange { what: "action", index: a, bound: self.n_actions });
        }
        Ok(())
    }

    /// Samples one step. The next state is drawn by inverse CDF (lowest index
    /// on ties); reward noise follows `meta.reward_noise`.
    pub fn sample_step(&self, t: usize, s: usize, a: usize, rng: &mut Stream) -> Result<Transition> {
        self.check_index(t, s, a)?;
        let p = &self.transitions[t][s][a];
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut next_state = p.iter().rposition(|&x| x > 0.0).unwrap_or(0);
        for (i, &pi) in p.iter().enumerate() {
            acc += pi;
            if u < acc {
                next_state = i;
                break;
            }
        }
        let mean = self.rewards[t][s][a];
        let reward = match self.meta.reward_noise {
            RewardNoise::None => mean,
            RewardNoise::Uniform { half_width } => mean + rng.random_range(-1.0..=1.0) * half_width,
            RewardNoise::Bernoulli => {
                if rng.random::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
        };
        Ok(Transition { t, s, a, reward, next_state })
    }

    /// Same env with a different reward-noise model.
    pub fn with_reward_noise(mut self, noise: RewardNoise) -> Self {
        self.meta.reward_noise = noise;
        self
    }

    pub fn to_file(&self) -> EnvFile {
        EnvFile {
            horizon: self.horizon,
            n_states: self.n_states,
            n_actions: self.n_actions,
            start_state: self.start_state,
            feature_dims: self.features.dims.clone(),
            features: self.features.phi.clone(),
            transitions: self.transitions.clone(),
            rewards: self.rewards.clone(),
            ball_radii: self.balls.radii.clone(),
            meta: self.meta.clone(),
        }
    }

    pub fn from_file(file: EnvFile) -> Result<Self> {
        if file.features.len() != file.horizon {
            return Err(EnvError::Shape(format!(
                "horizon {} but {} feature steps",
                file.horizon,
                file.features.len()
            )));
        }
        let features = FeatureMap::new(file.feature_dims, file.features)?;
        let balls = ParamBall::new(file.ball_radii)?;
        Self::new(file.n_states, file.n_actions, file.start_state, features, file.transitions, file.rewards, balls, file.meta)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_file()).expect("env serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| EnvError::Io { path: path.display().to_string(), source })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| EnvError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }
}

/// On-disk layout of an env. Field names are the file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvFile {
    pub horizon: usize,
    pub n_states: usize,
    pub n_actions: usize,
    pub start_state: usize,
    pub feature_dims: Vec<usize>,
    pub features: Vec<Vec<Vec<Vec<f64>>>>,
    pub transitions: Vec<Vec<Vec<Vec<f64>>>>,
    pub rewards: StepTable,
    pub ball_radii: Vec<f64>,
    pub meta: EnvMeta,
}

fn check_step_shape(
    what: &str,
    mut per_step: impl Iterator<Item = usize>,
    mut per_state: impl Iterator<Item = usize>,
    horizon: usize,
    n_states: usize,
    n_actions: usize,
) -> Result<()> {
    let mut steps = 0;
    for n in per_step.by_ref() {
        steps += 1;
        if n != n_states {
            return Err(EnvError::Shape(format!("{what}: {n} states at a step, expected {n_states}")));
        }
    }
    if steps != horizon {
        return Err(EnvError::Shape(format!("{what}: {steps} steps, expected {horizon}")));
    }
    if let Some(n) = per_state.find(|&n| n != n_actions) {
        return Err(EnvError::Shape(format!("{what}: {n} actions at a state, expected {n_actions}")));
    }
    Ok(())
}

fn validate_transitions(p: &[Vec<Vec<Vec<f64>>>], n_states: usize) -> Result<()> {
    for (t, step) in p.iter().enumerate() {
        for (s, row) in step.iter().enumerate() {
            for (a, dist) in row.iter().enumerate() {
                let sum: f64 = dist.iter().sum();
                let min = dist.iter().copied().fold(f64::INFINITY, f64::min);
                if dist.len() != n_states || !(min >= 0.0) || (sum - 1.0).abs() > PROB_TOL {
                    return Err(EnvError::InvalidProbabilityRow { t, s, a, sum, min });
                }
            }
        }
    }
    Ok(())
}

fn validate_rewards(r: &StepTable) -> Result<()> {
    for (t, step) in r.iter().enumerate() {
        for (s, row) in step.iter().enumerate() {
            for (a, &value) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&value) {
                    return Err(EnvError::RewardOutOfRange { t, s, a, value });
                }
            }
        }
    }
    Ok(())
}

fn one_hot(dim: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[i] = 1.0;
    v
}

/// Tabular MDP with indicator features over `(s, a)`; `d_t = S * A`.
pub fn make_tabular_onehot(
    n_states: usize,
    n_actions: usize,
    horizon: usize,
    rewards: StepTable,
    transitions: Vec<Vec<Vec<Vec<f64>>>>,
) -> Result<EpisodicLinearMDP> {
    let d = n_states * n_actions;
    let phi = (0..horizon)
        .map(|_| (0..n_states).map(|s| (0..n_actions).map(|a| one_hot(d, s * n_actions + a)).collect()).collect())
        .collect();
    let dims = vec![d; horizon];
    let balls = ParamBall::default_for(&dims);
    let features = FeatureMap::new(dims, phi)?;
    let meta = EnvMeta { generator: "tabular_onehot".into(), feature_scale: 1.0, ..Default::default() };
    EpisodicLinearMDP::new(n_states, n_actions, 0, features, transitions, rewards, balls, meta)
}

/// One-hot MDP with rewards uniform on `[0, 1]` and transition rows drawn
/// uniformly from the simplex.
pub fn random_tabular(n_states: usize, n_actions: usize, horizon: usize, seed: u64) -> Result<EpisodicLinearMDP> {
    if n_states == 0 || n_actions == 0 || horizon == 0 {
        return Err(EnvError::InvalidParameter("tabular sizes must be positive".into()));
    }
    let mut rng = rng::stream(seed, StreamKind::EnvGen, &[0]);
    let mut rewards = Vec::with_capacity(horizon);
    let mut transitions = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let mut r_t = Vec::with_capacity(n_states);
        let mut p_t = Vec::with_capacity(n_states);
        for _ in 0..n_states {
            r_t.push((0..n_actions).map(|_| rng.random::<f64>()).collect());
            p_t.push((0..n_actions).map(|_| rng::uniform_simplex(&mut rng, n_states)).collect());
        }
        rewards.push(r_t);
        transitions.push(p_t);
    }
    let mut env = make_tabular_onehot(n_states, n_actions, horizon, rewards, transitions)?;
    env.meta.generator = "tabular".into();
    env.meta.seed = Some(seed);
    env.meta.params = params(&[("n_states", n_states as f64), ("n_actions", n_actions as f64), ("horizon", horizon as f64)]);
    Ok(env)
}

fn params(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Low-rank MDP: features are points of the probability simplex over `d`
/// anchors, and each anchor carries a base next-state distribution `mu_j` and
/// a reward `eta_j`. Transitions and rewards are the induced convex
/// combinations, so they are exactly linear in the features.
///
/// The first `d` state-action pairs (state-major) sit on the anchors
/// themselves, which keeps the feature matrix full rank; with `d = S * A`
/// every pair is an anchor and the features are one-hot.
pub fn make_linear_mdp(d: usize, n_states: usize, n_actions: usize, horizon: usize, seed: u64) -> Result<EpisodicLinearMDP> {
    if d == 0 || n_states == 0 || n_actions == 0 || horizon == 0 {
        return Err(EnvError::InfeasibleDimensions("all sizes must be positive".into()));
    }
    if d > n_states * n_actions {
        return Err(EnvError::InfeasibleDimensions(format!("d = {d} exceeds S * A = {}", n_states * n_actions)));
    }
    let mut rng = rng::stream(seed, StreamKind::EnvGen, &[1]);
    let mut phi = Vec::with_capacity(horizon);
    let mut transitions = Vec::with_capacity(horizon);
    let mut rewards = Vec::with_capacity(horizon);
    let mut mu_all = Vec::with_capacity(horizon);
    let mut eta_all = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let mu: Vec<Vec<f64>> = (0..d).map(|_| rng::uniform_simplex(&mut rng, n_states)).collect();
        let eta: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let mut phi_t = Vec::with_capacity(n_states);
        let mut p_t = Vec::with_capacity(n_states);
        let mut r_t = Vec::with_capacity(n_states);
        for s in 0..n_states {
            let mut phi_s = Vec::with_capacity(n_actions);
            let mut p_s = Vec::with_capacity(n_actions);
            let mut r_s = Vec::with_capacity(n_actions);
            for a in 0..n_actions {
                let idx = s * n_actions + a;
                let f = if idx < d { one_hot(d, idx) } else { rng::uniform_simplex(&mut rng, d) };
                let p: Vec<f64> = (0..n_states).map(|sp| (0..d).map(|j| f[j] * mu[j][sp]).sum()).collect();
                let r: f64 = (0..d).map(|j| f[j] * eta[j]).sum::<f64>().clamp(0.0, 1.0);
                phi_s.push(f);
                p_s.push(p);
                r_s.push(r);
            }
            phi_t.push(phi_s);
            p_t.push(p_s);
            r_t.push(r_s);
        }
        phi.push(phi_t);
        transitions.push(p_t);
        rewards.push(r_t);
        mu_all.push(mu);
        eta_all.push(eta);
    }
    let dims = vec![d; horizon];
    let balls = ParamBall::default_for(&dims);
    let features = FeatureMap::new(dims, phi)?;
    let meta = EnvMeta {
        generator: "linear".into(),
        seed: Some(seed),
        params: params(&[("d", d as f64), ("n_states", n_states as f64), ("n_actions", n_actions as f64), ("horizon", horizon as f64)]),
        feature_scale: 1.0,
        linear: Some(LinearStructure { mu: mu_all, eta: eta_all }),
        ..Default::default()
    };
    EpisodicLinearMDP::new(n_states, n_actions, 0, features, transitions, rewards, balls, meta)
}

/// Adds an independent uniform perturbation in `[-eps, eps]` to every reward
/// (clamped to `[0, 1]`). The backup of any value function then moves by at
/// most `eps` in sup norm, so the inherent Bellman error grows by at most
/// `eps`.
pub fn make_misspecified(env: &EpisodicLinearMDP, eps: f64, seed: u64) -> Result<EpisodicLinearMDP> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(EnvError::InvalidParameter(format!("eps must be a nonnegative number, got {eps}")));
    }
    if eps == 0.0 {
        return Ok(env.clone());
    }
    let mut rng = rng::stream(seed, StreamKind::Misspecify, &[]);
    let mut out = env.clone();
    let mut perturbation = Vec::with_capacity(env.horizon);
    for step in out.rewards.iter_mut() {
        let mut pert_t = Vec::with_capacity(env.n_states);
        for row in step.iter_mut() {
            let mut pert_s = Vec::with_capacity(env.n_actions);
            for r in row.iter_mut() {
                let delta = rng.random_range(-eps..=eps);
                let new = (*r + delta).clamp(0.0, 1.0);
                pert_s.push(new - *r);
                *r = new;
            }
            pert_t.push(pert_s);
        }
        perturbation.push(pert_t);
    }
    out.meta.generator = format!("misspecified({})", env.meta.generator);
    out.meta.params.insert("eps".into(), eps);
    out.meta.params.insert("misspecify_seed".into(), seed as f64);
    out.meta.perturbation = Some(perturbation);
    Ok(out)
}

/// Sign vector of action `a`: coordinate `j` is `+1` when bit `j` is set.
pub fn sign_vector(a: usize, d: usize) -> Vec<f64> {
    (0..d).map(|j| if a >> j & 1 == 1 { 1.0 } else { -1.0 }).collect()
}

/// One-step bandit with `2^d` sign-vector arms and one bumped arm.
///
/// Features are `(1, s(a) / sqrt(d)) / sqrt(2)` (dimension `d + 1`, unit norm);
/// the constant coordinate carries the 1/2 offset that keeps Bernoulli means
/// inside `[0, 1]`. Linear means are `1/2 + (gap / 2) * s_1(a)`, so the arms
/// with `s_1 = +1` beat the rest by `gap`. The all-minus arm (index 0) gets an
/// extra `eps`, which makes it optimal once `eps > gap`.
///
/// This is a small demonstrative hard instance, not a minimax construction.
pub fn make_hard_bandit(d: usize, eps: f64, gap: f64) -> Result<EpisodicLinearMDP> {
    if d < 2 {
        return Err(EnvError::InvalidParameter(format!("hard bandit needs d >= 2, got {d}")));
    }
    if d > MAX_HARD_BANDIT_DIM {
        return Err(EnvError::InfeasibleDimensions(format!(
            "d = {d} gives 2^{d} arms; at most d = {MAX_HARD_BANDIT_DIM} is enumerated"
        )));
    }
    if !(eps >= 0.0) || !(gap > 0.0) {
        return Err(EnvError::InvalidParameter(format!("need eps >= 0 and gap > 0, got eps={eps} gap={gap}")));
    }
    let n_actions = 1usize << d;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let inv_sqrt_d = 1.0 / (d as f64).sqrt();
    let bumped = 0usize;
    let mut phi = Vec::with_capacity(n_actions);
    let mut means = Vec::with_capacity(n_actions);
    for a in 0..n_actions {
        let s = sign_vector(a, d);
        let mut f = Vec::with_capacity(d + 1);
        f.push(inv_sqrt2);
        f.extend(s.iter().map(|x| x * inv_sqrt_d * inv_sqrt2));
        phi.push(f);
        let bump = if a == bumped { eps } else { 0.0 };
        means.push((0.5 + 0.5 * gap * s[0] + bump).clamp(0.0, 1.0));
    }
    let dims = vec![d + 1];
    let balls = ParamBall::default_for(&dims);
    let features = FeatureMap::new(dims, vec![vec![phi]])?;
    let meta = EnvMeta {
        generator: "hard_bandit".into(),
        params: params(&[("d", d as f64), ("eps", eps), ("gap", gap)]),
        reward_noise: RewardNoise::Bernoulli,
        feature_scale: 1.0,
        note: Some("demonstrative stand-in for a misspecified hard bandit instance".into()),
        bumped_action: Some(bumped),
        ..Default::default()
    };
    EpisodicLinearMDP::new(1, n_actions, 0, features, vec![vec![vec![vec![1.0]; n_actions]]], vec![vec![means]], balls, meta)
}
