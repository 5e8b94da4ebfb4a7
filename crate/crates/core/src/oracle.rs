//! Ground truth for the experiments: exact backward induction, exact policy
//! evaluation, and an estimator for the inherent Bellman error (IBE) of an
//! env's feature map.
//!
//! The IBE at step `t` is
//!
//! ```text
//! I_t = sup_{|theta'| <= D_{t+1}}  inf_{|theta| <= D_t}  max_{s,a} |<phi_t(s,a), theta> - (T_t Q_theta')(s,a)|
//! ```
//!
//! where `T_t Q_theta'` is the Bellman backup of the clipped greedy value of
//! the linear Q-function `theta'` at step `t + 1`. The inner problem is a
//! convex minimax (Chebyshev) fit and is solved to a certified gap. The outer
//! sup is nonconcave, so [`ibe_estimate`] searches over candidates and
//! reports the best value found, i.e. a lower bound.

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rayon::prelude::*;
use thiserror::Error;

use crate::envs::EpisodicLinearMDP;
use crate::numerics::{dot, norm2};
use crate::rng::{self, StreamKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("policy picks action {a} at (t={t}, s={s}) but there are {n_actions} actions")]
    InvalidAction { t: usize, s: usize, a: usize, n_actions: usize },
    #[error("policy table shape does not match the env: {0}")]
    PolicyShape(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("step {t} out of range for horizon {horizon}")]
    StepOutOfRange { t: usize, horizon: usize },
}

pub type Result<T> = std::result::Result<T, OracleError>;

/// Deterministic policy table `policy[t][s]`.
pub type PolicyTable = Vec<Vec<usize>>;

/// Optimal values. `vstar` has `horizon + 1` rows; the last is all zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTables {
    pub vstar: Vec<Vec<f64>>,
    pub qstar: Vec<Vec<Vec<f64>>>,
    pub greedy_policy: PolicyTable,
}

impl ValueTables {
    pub fn start_value(&self, env: &EpisodicLinearMDP) -> f64 {
        self.vstar[0][env.start_state()]
    }
}

/// Lowest-index argmax.
pub fn argmax(values: impl IntoIterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

pub fn exact_dp(env: &EpisodicLinearMDP) -> ValueTables {
    let (h, ns, na) = (env.horizon(), env.n_states(), env.n_actions());
    let mut vstar = vec![vec![0.0; ns]; h + 1];
    let mut qstar = vec![vec![vec![0.0; na]; ns]; h];
    let mut greedy_policy = vec![vec![0; ns]; h];
    for t in (0..h).rev() {
        for s in 0..ns {
            for (a, q) in qstar[t][s].iter_mut().enumerate() {
                *q = env.reward(t, s, a) + dot(env.transition(t, s, a), &vstar[t + 1]);
            }
            let (a, v) = argmax(qstar[t][s].iter().copied());
            greedy_policy[t][s] = a;
            vstar[t][s] = v;
        }
    }
    ValueTables { vstar, qstar, greedy_policy }
}

fn check_policy_shape(env: &EpisodicLinearMDP, rows: usize, cols: impl Iterator<Item = usize>) -> Result<()> {
    if rows != env.horizon() {
        return Err(OracleError::PolicyShape(format!("{rows} steps for horizon {}", env.horizon())));
    }
    for (t, n) in cols.enumerate() {
        if n != env.n_states() {
            return Err(OracleError::PolicyShape(format!("{n} states at step {t}, expected {}", env.n_states())));
        }
    }
    Ok(())
}

/// Exact start-state value of a deterministic policy (backward induction).
pub fn evaluate_policy(env: &EpisodicLinearMDP, policy: &[Vec<usize>]) -> Result<f64> {
    check_policy_shape(env, policy.len(), policy.iter().map(Vec::len))?;
    let (h, ns, na) = (env.horizon(), env.n_states(), env.n_actions());
    let mut v = vec![0.0; ns];
    for t in (0..h).rev() {
        let mut next = vec![0.0; ns];
        for s in 0..ns {
            let a = policy[t][s];
            if a >= na {
                return Err(OracleError::InvalidAction { t, s, a, n_actions: na });
            }
            next[s] = env.reward(t, s, a) + dot(env.transition(t, s, a), &v);
        }
        v = next;
    }
    Ok(v[env.start_state()])
}

/// Exact start-state value of a stochastic policy `probs[t][s][a]`.
pub fn evaluate_stochastic_policy(env: &EpisodicLinearMDP, probs: &[Vec<Vec<f64>>]) -> Result<f64> {
    check_policy_shape(env, probs.len(), probs.iter().map(Vec::len))?;
    let (h, ns, na) = (env.horizon(), env.n_states(), env.n_actions());
    let mut v = vec![0.0; ns];
    for t in (0..h).rev() {
        let mut next = vec![0.0; ns];
        for s in 0..ns {
            if probs[t][s].len() != na {
                return Err(OracleError::PolicyShape(format!("{} action probabilities at ({t}, {s})", probs[t][s].len())));
            }
            next[s] = (0..na)
                .map(|a| probs[t][s][a] * (env.reward(t, s, a) + dot(env.transition(t, s, a), &v)))
                .sum();
        }
        v = next;
    }
    Ok(v[env.start_state()])
}

/// Greedy value of the linear Q-function `theta` at `(t, s)`, clipped to `[0, hi]`.
pub fn clipped_greedy_value(env: &EpisodicLinearMDP, t: usize, s: usize, theta: &[f64], hi: f64) -> f64 {
    let best = env
        .features()
        .actions(t, s)
        .iter()
        .map(|f| dot(f, theta))
        .fold(f64::NEG_INFINITY, f64::max);
    best.clamp(0.0, hi)
}

/// Bellman backup `b[s][a]` at step `t` of the linear Q-function `theta_next`
/// at step `t + 1`. At the last step the backup is the reward table and
/// `theta_next` is ignored.
pub fn bellman_backup_table(env: &EpisodicLinearMDP, t: usize, theta_next: &[f64]) -> Result<Vec<Vec<f64>>> {
    let h = env.horizon();
    if t >= h {
        return Err(OracleError::StepOutOfRange { t, horizon: h });
    }
    if t + 1 == h {
        return Ok(env.rewards()[t].clone());
    }
    let d_next = env.features().dim(t + 1);
    if theta_next.len() != d_next {
        return Err(OracleError::DimensionMismatch { expected: d_next, got: theta_next.len() });
    }
    let hi = env.value_range(t + 1);
    let v_next: Vec<f64> = (0..env.n_states()).map(|s| clipped_greedy_value(env, t + 1, s, theta_next, hi)).collect();
    Ok((0..env.n_states())
        .map(|s| (0..env.n_actions()).map(|a| env.reward(t, s, a) + dot(env.transition(t, s, a), &v_next)).collect())
        .collect())
}

/// Result of a ball-constrained minimax linear fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevFit {
    pub theta: Vec<f64>,
    /// Achieved objective `max_i |<phi_i, theta> - b_i|`.
    pub eps_fit: f64,
    /// Certified lower bound on the optimal objective.
    pub lower_bound: f64,
    /// `eps_fit - lower_bound`, clamped at zero.
    pub gap: f64,
}

/// Stop adding ball cuts once the certified gap is below this.
pub const CHEBYSHEV_GAP_TOL: f64 = 1e-9;
const MAX_BALL_CUTS: usize = 200;

fn max_abs_residual(rows: &[&[f64]], b: &[f64], theta: &[f64]) -> f64 {
    rows.iter().zip(b).map(|(r, bi)| (dot(r, theta) - bi).abs()).fold(0.0, f64::max)
}

/// Minimizes `max_i |<rows[i], theta> - b[i]|` over `|theta|_2 <= radius`.
///
/// Solved as a linear program in `(theta, s)` with the ball replaced by its
/// bounding box plus tangent cuts added until the LP optimum lies in the
/// ball. The LP value is a valid lower bound at every round (the polytope
/// contains the ball), and the LP point scaled back into the ball is feasible,
/// which certifies the reported gap.
pub fn chebyshev_fit(rows: &[&[f64]], b: &[f64], radius: f64) -> ChebyshevFit {
    assert_eq!(rows.len(), b.len(), "one target per feature row");
    assert!(radius > 0.0, "ball radius must be positive");
    let d = rows.first().map_or(0, |r| r.len());
    let worst_zero = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if d == 0 || rows.is_empty() {
        return ChebyshevFit { theta: vec![0.0; d], eps_fit: worst_zero, lower_bound: worst_zero, gap: 0.0 };
    }
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let theta_vars: Vec<_> = (0..d).map(|_| lp.add_var(0.0, (-radius, radius))).collect();
    let level = lp.add_var(1.0, (0.0, f64::INFINITY));
    for (row, &bi) in rows.iter().zip(b) {
        let mut above: Vec<_> = theta_vars.iter().zip(row.iter()).map(|(&v, &c)| (v, c)).collect();
        above.push((level, -1.0));
        lp.add_constraint(above.as_slice(), ComparisonOp::Le, bi);
        let mut below: Vec<_> = theta_vars.iter().zip(row.iter()).map(|(&v, &c)| (v, -c)).collect();
        below.push((level, -1.0));
        lp.add_constraint(below.as_slice(), ComparisonOp::Le, -bi);
    }
    let fallback = || {
        let theta = vec![0.0; d];
        ChebyshevFit { eps_fit: worst_zero, lower_bound: 0.0, gap: worst_zero, theta }
    };
    let Ok(mut solution) = lp.solve() else {
        return fallback();
    };
    let mut best = fallback();
    for _ in 0..=MAX_BALL_CUTS {
        let raw: Vec<f64> = theta_vars.iter().map(|&v| solution[v]).collect();
        let lower = solution.objective().max(0.0);
        let norm = norm2(&raw);
        let mut theta = raw.clone();
        crate::numerics::project_to_ball(&mut theta, radius);
        let eps_fit = max_abs_residual(rows, b, &theta);
        if eps_fit < best.eps_fit || (eps_fit == best.eps_fit && best.theta.iter().all(|&x| x == 0.0)) {
            best.theta = theta;
            best.eps_fit = eps_fit;
        }
        best.lower_bound = best.lower_bound.max(lower);
        best.gap = (best.eps_fit - best.lower_bound).max(0.0);
        if best.gap <= CHEBYSHEV_GAP_TOL || norm <= radius {
            break;
        }
        let cut: Vec<_> = theta_vars.iter().zip(&raw).map(|(&v, &x)| (v, x / norm)).collect();
        match solution.add_constraint(cut.as_slice(), ComparisonOp::Le, radius) {
            Ok(next) => solution = next,
            Err(_) => break,
        }
    }
    best
}

/// Search settings for [`ibe_estimate`].
#[derive(Debug, Clone, PartialEq)]
pub struct IbeOptions {
    /// Number of random next-step parameters drawn from the ball.
    pub budget: usize,
    pub seed: u64,
    /// One local-ascent refinement runs after every this many random draws.
    pub refine_every: usize,
    pub refine_steps: usize,
    /// Initial ascent step as a fraction of the next-step ball radius.
    pub refine_step: f64,
    /// Central-difference step as a fraction of the next-step ball radius.
    pub fd_step: f64,
}

impl Default for IbeOptions {
    fn default() -> Self {
        Self { budget: 512, seed: 0, refine_every: 32, refine_steps: 100, refine_step: 1e-2, fd_step: 1e-3 }
    }
}

impl IbeOptions {
    pub fn with_budget(budget: usize) -> Self {
        Self { budget, ..Self::default() }
    }
}

/// Per-step IBE estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct IbeEntry {
    /// 0-based step.
    pub t: usize,
    /// Best inner fit error found over the candidates (lower bound on `I_t`).
    pub ihat: f64,
    pub witness_theta_next: Vec<f64>,
    pub witness_theta_fit: Vec<f64>,
    /// Certified gap of the inner fit at the witness.
    pub inner_gap: f64,
    pub budget: usize,
    /// Number of next-step parameters evaluated.
    pub candidates: usize,
    /// True at the last step, where no outer search is needed.
    pub exact: bool,
}

struct Candidate {
    theta_next: Vec<f64>,
    fit: ChebyshevFit,
}

fn inner_fit(env: &EpisodicLinearMDP, t: usize, theta_next: &[f64]) -> ChebyshevFit {
    let b = bellman_backup_table(env, t, theta_next).expect("candidate has the next-step dimension");
    let targets: Vec<f64> = b.into_iter().flatten().collect();
    chebyshev_fit(&env.features().rows(t), &targets, env.balls().radius(t))
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    a.fit.eps_fit > b.fit.eps_fit
}

/// Local finite-difference ascent of the inner value from `start`.
fn refine(env: &EpisodicLinearMDP, t: usize, start: &Candidate, opts: &IbeOptions) -> Candidate {
    let radius = env.balls().radius(t + 1);
    let h = opts.fd_step * radius;
    let mut step = opts.refine_step * radius;
    let mut cur = Candidate { theta_next: start.theta_next.clone(), fit: start.fit.clone() };
    for _ in 0..opts.refine_steps {
        let d = cur.theta_next.len();
        let grad: Vec<f64> = (0..d)
            .map(|j| {
                let mut plus = cur.theta_next.clone();
                let mut minus = cur.theta_next.clone();
                plus[j] += h;
                minus[j] -= h;
                crate::numerics::project_to_ball(&mut plus, radius);
                crate::numerics::project_to_ball(&mut minus, radius);
                (inner_fit(env, t, &plus).eps_fit - inner_fit(env, t, &minus).eps_fit) / (2.0 * h)
            })
            .collect();
        let gn = norm2(&grad);
        if gn == 0.0 || !gn.is_finite() {
            break;
        }
        let mut next: Vec<f64> = cur.theta_next.iter().zip(&grad).map(|(x, g)| x + step * g / gn).collect();
        crate::numerics::project_to_ball(&mut next, radius);
        let fit = inner_fit(env, t, &next);
        let cand = Candidate { theta_next: next, fit };
        if better(&cand, &cur) {
            cur = cand;
        } else {
            step *= 0.5;
            if step < 1e-6 * radius {
                break;
            }
        }
    }
    cur
}

/// Estimates `I_t` for one step (0-based).
///
/// Candidates are evaluated in a fixed order that does not depend on the
/// budget: the origin, the `2 d` coordinate extremes `+-D e_j`, then random
/// draws from the ball in blocks of `refine_every`, each block followed by a
/// local ascent from the best candidate so far. A larger budget therefore
/// evaluates a superset of candidates, and the estimate is nondecreasing in
/// the budget.
pub fn ibe_estimate(env: &EpisodicLinearMDP, t: usize, opts: &IbeOptions) -> IbeEntry {
    let h = env.horizon();
    assert!(t < h, "step {t} out of range for horizon {h}");
    assert!(opts.budget >= 1, "budget must be at least 1");
    if t + 1 == h {
        let targets: Vec<f64> = env.rewards()[t].iter().flatten().copied().collect();
        let fit = chebyshev_fit(&env.features().rows(t), &targets, env.balls().radius(t));
        return IbeEntry {
            t,
            ihat: fit.eps_fit,
            witness_theta_next: Vec::new(),
            inner_gap: fit.gap,
            witness_theta_fit: fit.theta,
            budget: opts.budget,
            candidates: 1,
            exact: true,
        };
    }
    let d_next = env.features().dim(t + 1);
    let radius = env.balls().radius(t + 1);
    let mut fixed = vec![vec![0.0; d_next]];
    for j in 0..d_next {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; d_next];
            v[j] = sign * radius;
            fixed.push(v);
        }
    }
    let eval = |theta_next: Vec<f64>| {
        let fit = inner_fit(env, t, &theta_next);
        Candidate { theta_next, fit }
    };
    let mut best: Option<Candidate> = None;
    let mut count = 0usize;
    let mut absorb = |batch: Vec<Candidate>, best: &mut Option<Candidate>| {
        for c in batch {
            count += 1;
            if best.as_ref().is_none_or(|b| better(&c, b)) {
                *best = Some(c);
            }
        }
    };
    absorb(fixed.into_par_iter().map(eval).collect(), &mut best);

    let mut rng = rng::stream(opts.seed, StreamKind::Ibe, &[t as u64]);
    let block = opts.refine_every.max(1);
    let mut drawn = 0;
    while drawn < opts.budget {
        let n = block.min(opts.budget - drawn);
        let samples: Vec<Vec<f64>> = (0..n).map(|_| rng::uniform_in_ball(&mut rng, d_next, radius)).collect();
        drawn += n;
        absorb(samples.into_par_iter().map(eval).collect(), &mut best);
        if n == block {
            let start = best.as_ref().expect("at least one candidate");
            let refined = refine(env, t, start, opts);
            absorb(vec![refined], &mut best);
        }
    }
    let best = best.expect("at least one candidate");
    IbeEntry {
        t,
        ihat: best.fit.eps_fit,
        inner_gap: best.fit.gap,
        witness_theta_fit: best.fit.theta,
        witness_theta_next: best.theta_next,
        budget: opts.budget,
        candidates: count,
        exact: false,
    }
}

/// [`ibe_estimate`] for every step.
pub fn ibe_profile(env: &EpisodicLinearMDP, opts: &IbeOptions) -> Vec<IbeEntry> {
    (0..env.horizon()).map(|t| ibe_estimate(env, t, opts)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{make_hard_bandit, make_linear_mdp, make_misspecified, make_tabular_onehot, random_tabular};

    fn chain() -> EpisodicLinearMDP {
        let p = vec![
            vec![vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![0.0, 1.0], vec![1.0, 0.0]]];
            2
        ];
        let r = vec![vec![vec![0.0, 0.0], vec![0.0, 0.0]], vec![vec![0.0, 0.0], vec![1.0, 0.0]]];
        make_tabular_onehot(2, 2, 2, r, p).unwrap()
    }

    /// Value of every deterministic policy by forward propagation of the
    /// state distribution; independent of backward induction.
    fn brute_force_best(env: &EpisodicLinearMDP) -> f64 {
        let (h, ns, na) = (env.horizon(), env.n_states(), env.n_actions());
        let cells = h * ns;
        let total = na.pow(cells as u32);
        let mut best = f64::NEG_INFINITY;
        for code in 0..total {
            let mut c = code;
            let pol: Vec<Vec<usize>> = (0..h)
                .map(|_| {
                    (0..ns)
                        .map(|_| {
                            let a = c % na;
                            c /= na;
                            a
                        })
                        .collect()
                })
                .collect();
            let mut dist = vec![0.0; ns];
            dist[env.start_state()] = 1.0;
            let mut value = 0.0;
            for t in 0..h {
                let mut next = vec![0.0; ns];
                for s in 0..ns {
                    let a = pol[t][s];
                    value += dist[s] * env.reward(t, s, a);
                    for (sp, p) in env.transition(t, s, a).iter().enumerate() {
                        next[sp] += dist[s] * p;
                    }
                }
                dist = next;
            }
            best = best.max(value);
        }
        best
    }

    #[test]
    fn bandit_value_is_best_reward() {
        let env = make_hard_bandit(2, 0.3, 0.2).unwrap();
        let vt = exact_dp(&env);
        let best = env.rewards()[0][0].iter().copied().fold(f64::MIN, f64::max);
        assert_eq!(vt.start_value(&env), best);
        // bumped arm is optimal when eps > gap
        assert_eq!(vt.greedy_policy[0][0], 0);
        let plain = exact_dp(&make_hard_bandit(2, 0.0, 0.2).unwrap());
        assert_eq!(plain.greedy_policy[0][0], 1);
    }

    #[test]
    fn chain_value_by_hand() {
        let env = chain();
        let vt = exact_dp(&env);
        assert_eq!(vt.start_value(&env), 1.0);
        assert_eq!(vt.greedy_policy[0][0], 1);
        assert_eq!(vt.vstar[2], vec![0.0, 0.0]);
    }

    #[test]
    fn dp_matches_policy_enumeration() {
        for seed in 0..20 {
            let (s, a, h) = [(2, 2, 3), (3, 2, 2), (2, 3, 2), (4, 2, 1)][seed as usize % 4];
            let env = random_tabular(s, a, h, seed).unwrap();
            let vt = exact_dp(&env);
            let bf = brute_force_best(&env);
            assert!((vt.start_value(&env) - bf).abs() < 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn dp_bellman_residual_and_range() {
        let env = random_tabular(4, 3, 4, 3).unwrap();
        let vt = exact_dp(&env);
        for t in 0..4 {
            for s in 0..4 {
                let m = vt.qstar[t][s].iter().copied().fold(f64::MIN, f64::max);
                assert_eq!(vt.vstar[t][s], m);
                for a in 0..3 {
                    let q = env.reward(t, s, a) + dot(env.transition(t, s, a), &vt.vstar[t + 1]);
                    assert!((q - vt.qstar[t][s][a]).abs() <= 1e-12);
                }
                assert!(vt.vstar[t][s] >= 0.0 && vt.vstar[t][s] <= (4 - t) as f64);
            }
        }
    }

    #[test]
    fn policy_evaluation() {
        let env = random_tabular(3, 2, 3, 1).unwrap();
        let vt = exact_dp(&env);
        let v = evaluate_policy(&env, &vt.greedy_policy).unwrap();
        assert!((v - vt.start_value(&env)).abs() <= 1e-12);
        for code in 0..64usize {
            let pol: PolicyTable = (0..3).map(|t| (0..3).map(|s| (code >> (t * 2 + s % 2)) & 1).collect()).collect();
            assert!(evaluate_policy(&env, &pol).unwrap() <= vt.start_value(&env) + 1e-12);
        }
        let bad = vec![vec![2, 0, 0]; 3];
        assert!(matches!(evaluate_policy(&env, &bad), Err(OracleError::InvalidAction { .. })));
        assert!(evaluate_policy(&env, &vec![vec![0, 0, 0]; 2]).is_err());
    }

    #[test]
    fn uniform_policy_on_two_arms() {
        let env = make_tabular_onehot(1, 2, 1, vec![vec![vec![0.0, 1.0]]], vec![vec![vec![vec![1.0]; 2]]]).unwrap();
        let v = evaluate_stochastic_policy(&env, &[vec![vec![0.5, 0.5]]]).unwrap();
        assert_eq!(v, 0.5);
    }

    #[test]
    fn backup_examples() {
        let env = chain();
        assert_eq!(bellman_backup_table(&env, 1, &[]).unwrap(), env.rewards()[1]);
        assert_eq!(bellman_backup_table(&env, 0, &[0.0; 4]).unwrap(), env.rewards()[0]);
        // next-step Q puts value 1 on (s=1, a=0) only, so V(1) = 1, V(0) = 0
        let b = bellman_backup_table(&env, 0, &[0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(b, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(matches!(bellman_backup_table(&env, 0, &[0.0; 3]), Err(OracleError::DimensionMismatch { .. })));
    }

    #[test]
    fn backup_clips_next_value() {
        let env = chain();
        // a huge parameter saturates at the value range of the last step (1)
        let b = bellman_backup_table(&env, 0, &[50.0, 50.0, 50.0, 50.0]).unwrap();
        assert_eq!(b, vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        let b = bellman_backup_table(&env, 0, &[-5.0; 4]).unwrap();
        assert_eq!(b, env.rewards()[0]);
    }

    #[test]
    fn chebyshev_realizable_target() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![(i as f64).sin() * 0.5, (i as f64 * 0.3).cos() * 0.5, 0.4]).collect();
        let theta = [0.7, -1.1, 0.3];
        let b: Vec<f64> = rows.iter().map(|r| dot(r, &theta)).collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let fit = chebyshev_fit(&refs, &b, 5.0);
        assert!(fit.eps_fit <= 1e-6, "{fit:?}");
    }

    #[test]
    fn chebyshev_onehot_is_exact() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| (0..5).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        let b = [0.1, 2.0, -0.5, 1.5, 0.0];
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let fit = chebyshev_fit(&refs, &b, 10.0);
        assert!(fit.eps_fit <= 1e-6);
        for (x, y) in fit.theta.iter().zip(b) {
            assert!((x - y).abs() <= 1e-6);
        }
    }

    #[test]
    fn chebyshev_one_dim_center() {
        let rows = [[1.0], [1.0]];
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let fit = chebyshev_fit(&refs, &[0.0, 1.0], 100.0);
        assert!((fit.theta[0] - 0.5).abs() < 1e-9);
        assert!((fit.eps_fit - 0.5).abs() < 1e-9);
        assert!(fit.gap <= 1e-9);
    }

    #[test]
    fn chebyshev_ball_binds() {
        // target wants theta = (3, 4) but the ball has radius 1
        let rows = [[1.0, 0.0], [0.0, 1.0]];
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let fit = chebyshev_fit(&refs, &[3.0, 4.0], 1.0);
        assert!(norm2(&fit.theta) <= 1.0 + 1e-9);
        // the optimum lies on the circle; compare against a dense sweep of it
        assert!(fit.gap <= 1e-6, "{fit:?}");
        let brute = (0..200_000)
            .map(|i| {
                let a = i as f64 / 200_000.0 * std::f64::consts::TAU;
                (3.0 - a.cos()).abs().max((4.0 - a.sin()).abs())
            })
            .fold(f64::INFINITY, f64::min);
        assert!((fit.eps_fit - brute).abs() < 1e-6, "{} vs {brute}", fit.eps_fit);
    }

    #[test]
    fn chebyshev_midpoint_convexity() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let rows: Vec<Vec<f64>> = (0..8).map(|_| (0..3).map(|_| rng.random_range(-0.5..0.5)).collect()).collect();
            let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
            let b: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..2.0)).collect();
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
            let f = |th: &[f64]| max_abs_residual(&refs, &b, th);
            assert!(f(&mid) <= f(&x).max(f(&y)) + 1e-15);
            let fit = chebyshev_fit(&refs, &b, 3.0);
            assert!(fit.eps_fit <= f(&x).min(f(&y)) + 1e-9 || norm2(&x) > 3.0);
        }
    }

    #[test]
    fn ibe_tabular_is_zero() {
        let env = random_tabular(3, 2, 3, 0).unwrap();
        for e in ibe_profile(&env, &IbeOptions::with_budget(64)) {
            assert!(e.ihat <= 1e-6, "{e:?}");
        }
    }

    #[test]
    fn ibe_last_step_is_exact_fit() {
        let env = make_misspecified(&make_linear_mdp(3, 6, 2, 3, 7).unwrap(), 0.1, 7).unwrap();
        let e = ibe_estimate(&env, 2, &IbeOptions::with_budget(8));
        let targets: Vec<f64> = env.rewards()[2].iter().flatten().copied().collect();
        let fit = chebyshev_fit(&env.features().rows(2), &targets, env.balls().radius(2));
        assert!(e.exact);
        assert_eq!(e.ihat, fit.eps_fit);
    }

    #[test]
    fn ibe_monotone_in_budget() {
        let env = make_misspecified(&make_linear_mdp(2, 4, 2, 2, 3).unwrap(), 0.2, 3).unwrap();
        let mut last = 0.0;
        for budget in [1, 16, 32, 64, 96] {
            let e = ibe_estimate(&env, 0, &IbeOptions { budget, seed: 5, ..IbeOptions::default() });
            assert!(e.ihat >= last, "budget {budget}: {} < {last}", e.ihat);
            assert!(norm2(&e.witness_theta_next) <= env.balls().radius(1) + 1e-9);
            assert!(norm2(&e.witness_theta_fit) <= env.balls().radius(0) + 1e-9);
            last = e.ihat;
        }
    }
}
