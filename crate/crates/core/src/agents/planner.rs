//! Global optimistic planning over one unit-ball perturbation per step.
//!
//! With `theta_bar_t = theta_hat_t + r_t L_t^{-T} u_t` (`Sigma_t = L_t L_t^T`,
//! `|u_t| <= 1`), the start-state value is
//! `J = max_a <phi_0(s_1, a), theta_bar_0>` where each `theta_hat_t` is the
//! least-squares fit of targets built from the clipped greedy values of
//! `theta_bar_{t+1}`. The first-step perturbation enters `J` linearly, so it
//! is solved in closed form; the rest is a multi-start projected ascent.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::envs::FeatureMap;
use crate::numerics::{dot, norm2, project_to_ball, SpdMatrix};
use crate::oracle::{argmax, PolicyTable};
use crate::rng::{self, StreamKind};

use super::gram::{center_from_moments, lsq_center, GramState, NextStep};
use super::{AgentError, Result};

/// Largest `sum_t d_t` the grid oracle accepts.
pub const MAX_GRID_DIM: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    /// Random restarts in addition to the zero start.
    pub restarts: usize,
    pub iterations: usize,
    /// Initial length of the normalized ascent step.
    pub step: f64,
    /// Stop once the step has been halved below this.
    pub min_step: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self { restarts: 8, iterations: 300, step: 0.1, min_step: 1e-9 }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) || !(self.min_step > 0.0) {
            return Err(AgentError::InvalidConfig(format!(
                "planner step sizes must be positive (step {}, min_step {})",
                self.step, self.min_step
            )));
        }
        Ok(())
    }
}

/// Everything the planner reads. `grams`, `radii`, and the feature map all
/// cover the same `H` steps.
#[derive(Debug, Clone, Copy)]
pub struct PlanInputs<'a> {
    pub grams: &'a [GramState],
    pub radii: &'a [f64],
    pub features: &'a FeatureMap,
    pub start_state: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipsoidParam {
    pub theta_hat: Vec<f64>,
    pub radius: f64,
    pub u: Vec<f64>,
    pub theta_bar: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub params: Vec<EllipsoidParam>,
    /// Achieved optimistic start-state value.
    pub value: f64,
    /// Maximizer of the first-step bonus program at the start state.
    pub start_action: usize,
    /// Restart that produced the plan (0 is the zero start).
    pub restart: usize,
}

impl Plan {
    /// Greedy policy w.r.t. `theta_bar`, lowest index on ties. At the start
    /// state of the first step it takes `start_action`, the action whose
    /// bonus defines `value`.
    pub fn greedy_policy(&self, features: &FeatureMap, start_state: usize) -> PolicyTable {
        let mut policy: PolicyTable = self
            .params
            .iter()
            .enumerate()
            .map(|(t, p)| {
                features.step(t).iter().map(|row| argmax(row.iter().map(|f| dot(f, &p.theta_bar))).0).collect()
            })
            .collect();
        if let Some(first) = policy.first_mut() {
            first[start_state] = self.start_action;
        }
        policy
    }
}

/// `<phi_a, theta_hat> + radius |L^{-1} phi_a|` for each action: the largest
/// value of `<phi_a, theta>` over `|theta - theta_hat|_Sigma <= radius`.
pub fn ucb_scores(sigma: &SpdMatrix, theta_hat: &[f64], radius: f64, actions: &[Vec<f64>]) -> Result<Vec<f64>> {
    actions.iter().map(|phi| Ok(dot(phi, theta_hat) + radius * sigma.inv_maha_norm(phi)?)).collect()
}

fn check_inputs(inp: &PlanInputs<'_>) -> Result<()> {
    let h = inp.features.horizon();
    let mismatch = |expected, got| AgentError::DimensionMismatch { expected, got };
    if inp.grams.len() != h {
        return Err(mismatch(h, inp.grams.len()));
    }
    if inp.radii.len() != h {
        return Err(mismatch(h, inp.radii.len()));
    }
    if h == 0 {
        return Err(AgentError::InvalidConfig("horizon must be at least 1".into()));
    }
    for (t, g) in inp.grams.iter().enumerate() {
        if g.dim() != inp.features.dim(t) {
            return Err(mismatch(inp.features.dim(t), g.dim()));
        }
        if t + 1 < h && g.next_moments().len() != inp.features.step(t + 1).len() {
            return Err(mismatch(inp.features.step(t + 1).len(), g.next_moments().len()));
        }
        if !(inp.radii[t] >= 0.0 && inp.radii[t].is_finite()) {
            return Err(AgentError::InvalidConfig(format!("radius at step {t} is {}", inp.radii[t])));
        }
    }
    if inp.start_state >= inp.features.step(0).len() {
        return Err(AgentError::InvalidConfig(format!("start state {} out of range", inp.start_state)));
    }
    Ok(())
}

/// One evaluation of the backward recursion for fixed `u_1..u_{H-1}`.
struct Trace {
    theta_hat: Vec<Vec<f64>>,
    theta_bar: Vec<Vec<f64>>,
    /// `[t][s]` greedy action under `theta_bar_t` (steps `t >= 1`).
    greedy: Vec<Vec<usize>>,
    /// `[t][s]` whether the clip is inactive (value moves with `theta_bar_t`).
    active: Vec<Vec<bool>>,
    value: f64,
    start_action: usize,
}

fn evaluate(inp: &PlanInputs<'_>, us: &[Vec<f64>]) -> Result<Trace> {
    let h = inp.features.horizon();
    let mut theta_hat = vec![Vec::new(); h];
    let mut theta_bar = vec![Vec::new(); h];
    let mut greedy = vec![Vec::new(); h];
    let mut active = vec![Vec::new(); h];
    let mut next_values: Option<Vec<f64>> = None;
    for t in (1..h).rev() {
        let gram = &inp.grams[t];
        let hat = center_from_moments(gram, next_values.as_deref());
        let mut bar = hat.clone();
        if inp.radii[t] > 0.0 {
            let offset = gram.sigma().solve_upper(&us[t])?;
            for (b, o) in bar.iter_mut().zip(&offset) {
                *b += inp.radii[t] * o;
            }
        }
        let hi = (h - t) as f64;
        let step = inp.features.step(t);
        let mut values = Vec::with_capacity(step.len());
        let mut acts = Vec::with_capacity(step.len());
        let mut act_flags = Vec::with_capacity(step.len());
        for row in step {
            let (a, raw) = argmax(row.iter().map(|f| dot(f, &bar)));
            values.push(raw.clamp(0.0, hi));
            acts.push(a);
            act_flags.push((0.0..hi).contains(&raw));
        }
        theta_hat[t] = hat;
        theta_bar[t] = bar;
        greedy[t] = acts;
        active[t] = act_flags;
        next_values = Some(values);
    }
    let gram = &inp.grams[0];
    let hat = center_from_moments(gram, next_values.as_deref());
    let scores = ucb_scores(gram.sigma(), &hat, inp.radii[0], inp.features.actions(0, inp.start_state))?;
    let (start_action, value) = argmax(scores);
    theta_hat[0] = hat;
    Ok(Trace { theta_hat, theta_bar, greedy, active, value, start_action })
}

/// Subgradient of `J` w.r.t. `u_1..u_{H-1}` (entry 0 is left at zero).
fn gradient(inp: &PlanInputs<'_>, tr: &Trace) -> Result<Vec<Vec<f64>>> {
    let h = inp.features.horizon();
    let mut grads: Vec<Vec<f64>> = (0..h).map(|t| vec![0.0; inp.features.dim(t)]).collect();
    let mut g_hat = inp.features.get(0, inp.start_state, tr.start_action).to_vec();
    for t in 0..h - 1 {
        let gram = &inp.grams[t];
        let y = gram.sigma().solve(&g_hat)?;
        let mut g_bar = vec![0.0; inp.features.dim(t + 1)];
        for (s_next, moment) in gram.next_moments().iter().enumerate() {
            if !tr.active[t + 1][s_next] {
                continue;
            }
            let w = dot(moment, &y);
            if w != 0.0 {
                let phi = inp.features.get(t + 1, s_next, tr.greedy[t + 1][s_next]);
                for (g, x) in g_bar.iter_mut().zip(phi) {
                    *g += w * x;
                }
            }
        }
        let r = inp.radii[t + 1];
        let mut g_u = inp.grams[t + 1].sigma().solve_lower(&g_bar)?;
        g_u.iter_mut().for_each(|x| *x *= r);
        grads[t + 1] = g_u;
        g_hat = g_bar;
    }
    Ok(grads)
}

fn ascend(inp: &PlanInputs<'_>, cfg: &PlannerConfig, mut us: Vec<Vec<f64>>) -> Result<(Vec<Vec<f64>>, Trace)> {
    let mut trace = evaluate(inp, &us)?;
    let mut step = cfg.step;
    for _ in 0..cfg.iterations {
        if step < cfg.min_step {
            break;
        }
        let grads = gradient(inp, &trace)?;
        let gnorm = grads.iter().map(|g| dot(g, g)).sum::<f64>().sqrt();
        if !(gnorm > 0.0) {
            break;
        }
        let candidate: Vec<Vec<f64>> = us
            .iter()
            .zip(&grads)
            .map(|(u, g)| {
                let mut v: Vec<f64> = u.iter().zip(g).map(|(x, gx)| x + step * gx / gnorm).collect();
                project_to_ball(&mut v, 1.0);
                v
            })
            .collect();
        let cand_trace = evaluate(inp, &candidate)?;
        if cand_trace.value > trace.value {
            us = candidate;
            trace = cand_trace;
        } else {
            step *= 0.5;
        }
    }
    Ok((us, trace))
}

/// Maximizes `J` over the perturbations. Restart 0 starts from `u = 0`;
/// restarts `1..=cfg.restarts` start from uniform draws in the unit ball,
/// taken from the planner stream keyed by `(seed, rng_key..., restart)`.
/// The best restart wins; ties go to the lower index.
pub fn eleanor_plan(inp: &PlanInputs<'_>, cfg: &PlannerConfig, seed: u64, rng_key: &[u64]) -> Result<Plan> {
    check_inputs(inp)?;
    cfg.validate()?;
    let h = inp.features.horizon();
    let zero: Vec<Vec<f64>> = (0..h).map(|t| vec![0.0; inp.features.dim(t)]).collect();
    let searchable = inp.radii[1..].iter().any(|&r| r > 0.0);

    let (mut best_us, mut best) = ascend(inp, cfg, zero)?;
    let mut best_restart = 0;
    if searchable {
        for restart in 1..=cfg.restarts {
            let mut counters = rng_key.to_vec();
            counters.push(restart as u64);
            let mut stream = rng::stream(seed, StreamKind::Planner, &counters);
            let start: Vec<Vec<f64>> = (0..h)
                .map(|t| if t == 0 { vec![0.0; inp.features.dim(0)] } else { unit_ball(&mut stream, inp.features.dim(t)) })
                .collect();
            let (us, trace) = ascend(inp, cfg, start)?;
            if trace.value > best.value {
                best_us = us;
                best = trace;
                best_restart = restart;
            }
        }
    }

    // closed-form first-step perturbation
    let gram0 = &inp.grams[0];
    let phi = inp.features.get(0, inp.start_state, best.start_action);
    let mut u0 = gram0.sigma().solve_lower(phi)?;
    let n = norm2(&u0);
    if inp.radii[0] > 0.0 && n > 0.0 {
        u0.iter_mut().for_each(|x| *x /= n);
    } else {
        u0.iter_mut().for_each(|x| *x = 0.0);
    }
    let mut theta_bar0 = best.theta_hat[0].clone();
    if inp.radii[0] > 0.0 {
        let offset = gram0.sigma().solve_upper(&u0)?;
        for (b, o) in theta_bar0.iter_mut().zip(&offset) {
            *b += inp.radii[0] * o;
        }
    }
    best_us[0] = u0;
    best.theta_bar[0] = theta_bar0;

    let params = best
        .theta_hat
        .into_iter()
        .zip(best.theta_bar)
        .zip(best_us)
        .enumerate()
        .map(|(t, ((theta_hat, theta_bar), u))| EllipsoidParam { theta_hat, radius: inp.radii[t], u, theta_bar })
        .collect();
    Ok(Plan { params, value: best.value, start_action: best.start_action, restart: best_restart })
}

fn unit_ball(stream: &mut rng::Stream, dim: usize) -> Vec<f64> {
    rng::uniform_in_ball(stream, dim, 1.0)
}

/// Grid over the closed unit ball: `n` evenly spaced points on `[-1, 1]` for
/// `dim = 1`; for `dim = 2` the origin plus `n - 1` shells of radius
/// `i / (n - 1)`, each with `n - 1` evenly spaced angles. Grids with
/// `n = 2^m + 1` are nested.
pub fn grid_points(dim: usize, n: usize) -> Result<Vec<Vec<f64>>> {
    if n < 2 {
        return Err(AgentError::InvalidConfig(format!("grid resolution must be at least 2, got {n}")));
    }
    match dim {
        0 => Ok(vec![Vec::new()]),
        1 => Ok((0..n).map(|i| vec![-1.0 + 2.0 * i as f64 / (n - 1) as f64]).collect()),
        2 => {
            let m = n - 1;
            let mut pts = vec![vec![0.0, 0.0]];
            for i in 1..=m {
                let rho = i as f64 / m as f64;
                for j in 0..m {
                    let ang = std::f64::consts::TAU * j as f64 / m as f64;
                    pts.push(vec![rho * ang.cos(), rho * ang.sin()]);
                }
            }
            Ok(pts)
        }
        _ => Err(AgentError::GridBudget { total: dim, max: 2 }),
    }
}

/// Brute-force maximum of `J` over a grid on every unit ball, evaluated with
/// the raw-sample least-squares fit. The first-step maximization is done per
/// action: `max_u <L_0^{-1} phi_a, u>` over the grid.
pub fn grid_oracle_plan(inp: &PlanInputs<'_>, resolution: usize) -> Result<f64> {
    check_inputs(inp)?;
    let h = inp.features.horizon();
    let total: usize = inp.features.dims().iter().sum();
    if total > MAX_GRID_DIM {
        return Err(AgentError::GridBudget { total, max: MAX_GRID_DIM });
    }
    let mut offsets: Vec<Vec<Vec<f64>>> = Vec::with_capacity(h);
    for t in 0..h {
        let d = inp.features.dim(t);
        if inp.radii[t] == 0.0 {
            offsets.push(vec![vec![0.0; d]]);
            continue;
        }
        let pts = grid_points(d, resolution)?;
        offsets.push(if t == 0 {
            pts
        } else {
            pts.iter()
                .map(|u| {
                    let mut o = inp.grams[t].sigma().solve_upper(u)?;
                    o.iter_mut().for_each(|x| *x *= inp.radii[t]);
                    Ok(o)
                })
                .collect::<Result<_>>()?
        });
    }
    let actions0 = inp.features.actions(0, inp.start_state);
    let mut bonus0 = Vec::with_capacity(actions0.len());
    for phi in actions0 {
        let w = inp.grams[0].sigma().solve_lower(phi)?;
        let g = offsets[0].iter().map(|u| dot(&w, u)).fold(f64::NEG_INFINITY, f64::max);
        bonus0.push(inp.radii[0] * g);
    }
    grid_search(inp, &offsets, &bonus0, h - 1, None)
}

fn grid_search(
    inp: &PlanInputs<'_>,
    offsets: &[Vec<Vec<f64>>],
    bonus0: &[f64],
    t: usize,
    next_bar: Option<&[f64]>,
) -> Result<f64> {
    let h = inp.features.horizon();
    let next = next_bar.map(|theta| NextStep {
        theta,
        features: inp.features.step(t + 1),
        clip_hi: (h - t - 1) as f64,
    });
    let hat = lsq_center(&inp.grams[t], next)?;
    if t == 0 {
        let actions = inp.features.actions(0, inp.start_state);
        return Ok(actions.iter().zip(bonus0).map(|(phi, b)| dot(phi, &hat) + b).fold(f64::NEG_INFINITY, f64::max));
    }
    let mut best = f64::NEG_INFINITY;
    let mut bar = hat.clone();
    for o in &offsets[t] {
        for ((b, x), y) in bar.iter_mut().zip(&hat).zip(o) {
            *b = x + y;
        }
        best = best.max(grid_search(inp, offsets, bonus0, t - 1, Some(&bar))?);
    }
    Ok(best)
}

/// A random planning problem: features, datasets, and radii.
#[derive(Debug, Clone)]
pub struct PlanInstance {
    pub features: FeatureMap,
    pub grams: Vec<GramState>,
    pub radii: Vec<f64>,
    pub start_state: usize,
}

impl PlanInstance {
    pub fn inputs(&self) -> PlanInputs<'_> {
        PlanInputs { grams: &self.grams, radii: &self.radii, features: &self.features, start_state: self.start_state }
    }
}

/// Random instance with `H <= max_horizon`, `d_t <= max_dim`, and at most
/// `max_samples` samples in total, drawn from the instance stream `(seed, index)`.
pub fn random_plan_instance(
    seed: u64,
    index: u64,
    max_horizon: usize,
    max_dim: usize,
    max_samples: usize,
) -> Result<PlanInstance> {
    if max_horizon == 0 || max_dim == 0 {
        return Err(AgentError::InvalidConfig("horizon and dimension bounds must be positive".into()));
    }
    let mut rng = rng::stream(seed, StreamKind::Instance, &[index]);
    let h = rng.random_range(1..=max_horizon);
    let n_states = rng.random_range(2..=4);
    let n_actions = rng.random_range(2..=3);
    let dims: Vec<usize> = (0..h).map(|_| rng.random_range(1..=max_dim)).collect();
    let phi: Vec<Vec<Vec<Vec<f64>>>> = dims
        .iter()
        .map(|&d| {
            (0..n_states)
                .map(|_| {
                    (0..n_actions)
                        .map(|_| {
                            let rho: f64 = rng.random_range(0.2..1.0);
                            let v = rng::uniform_in_ball(&mut rng, d, 1.0);
                            let n = norm2_or_one(&v);
                            v.iter().map(|x| x * rho / n).collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let features = FeatureMap::new(dims.clone(), phi).map_err(AgentError::from)?;
    let lambda = rng.random_range(0.5..2.0);
    let per_step = (max_samples / h).max(1);
    let mut grams = Vec::with_capacity(h);
    for (t, &d) in dims.iter().enumerate() {
        let mut g = GramState::new(d, n_states, lambda)?;
        let n = rng.random_range(1..=per_step);
        for _ in 0..n {
            let s = rng.random_range(0..n_states);
            let a = rng.random_range(0..n_actions);
            let tr = crate::envs::Transition {
                t,
                s,
                a,
                reward: rng.random_range(0.0..1.0),
                next_state: rng.random_range(0..n_states),
            };
            g.push(tr, features.get(t, s, a))?;
        }
        grams.push(g);
    }
    let radii = (0..h).map(|_| rng.random_range(0.1..2.0)).collect();
    let start_state = rng.random_range(0..n_states);
    Ok(PlanInstance { features, grams, radii, start_state })
}

fn norm2_or_one(x: &[f64]) -> f64 {
    let n = norm2(x);
    if n > 0.0 {
        n
    } else {
        1.0
    }
}
