use crate::envs::Transition;
use crate::numerics::{dot, SpdMatrix};

use super::{AgentError, Result};

/// A transition together with the feature vector of its `(s, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub transition: Transition,
    pub phi: Vec<f64>,
}

/// Regularized Gram matrix `lambda I + sum phi phi^T` of one step, the raw
/// samples behind it, and per-next-state feature sums.
///
/// Regression targets depend on the next-step parameter, which changes every
/// episode, so no `sum phi y` accumulator is kept. The targets are a function
/// of the next state only, though, so `sum_{i: s'_i = s'} phi_i` can be kept
/// per next state and the right-hand side rebuilt in `O(S d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramState {
    lambda: f64,
    sigma: SpdMatrix,
    samples: Vec<Sample>,
    reward_moment: Vec<f64>,
    next_moments: Vec<Vec<f64>>,
}

impl GramState {
    pub fn new(dim: usize, n_states: usize, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(AgentError::InvalidConfig(format!("lambda must be positive, got {lambda}")));
        }
        Ok(Self {
            lambda,
            sigma: SpdMatrix::scaled_identity(dim, lambda),
            samples: Vec::new(),
            reward_moment: vec![0.0; dim],
            next_moments: vec![vec![0.0; dim]; n_states],
        })
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma(&self) -> &SpdMatrix {
        &self.sigma
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `sum_i phi_i r_i` in insertion order.
    pub fn reward_moment(&self) -> &[f64] {
        &self.reward_moment
    }

    /// `sum_{i: s'_i = s'} phi_i`, indexed by next state.
    pub fn next_moments(&self) -> &[Vec<f64>] {
        &self.next_moments
    }

    pub fn push(&mut self, transition: Transition, phi: &[f64]) -> Result<()> {
        if phi.len() != self.dim() {
            return Err(AgentError::DimensionMismatch { expected: self.dim(), got: phi.len() });
        }
        if transition.next_state >= self.next_moments.len() {
            return Err(AgentError::InvalidConfig(format!(
                "next state {} out of range for {} states",
                transition.next_state,
                self.next_moments.len()
            )));
        }
        self.sigma.add_outer(phi)?;
        for (m, x) in self.reward_moment.iter_mut().zip(phi) {
            *m += x * transition.reward;
        }
        for (m, x) in self.next_moments[transition.next_state].iter_mut().zip(phi) {
            *m += x;
        }
        self.samples.push(Sample { transition, phi: phi.to_vec() });
        Ok(())
    }

    /// `lambda I + sum phi phi^T` rebuilt from the raw samples (row-major).
    pub fn reconstruct_sigma(&self) -> Vec<f64> {
        let d = self.dim();
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            m[i * d + i] = self.lambda;
        }
        for s in &self.samples {
            for i in 0..d {
                for j in 0..d {
                    m[i * d + j] += s.phi[i] * s.phi[j];
                }
            }
        }
        m
    }
}

/// Next-step data needed to form regression targets.
#[derive(Debug, Clone, Copy)]
pub struct NextStep<'a> {
    pub theta: &'a [f64],
    /// Step `t + 1` feature table `[s][a]`.
    pub features: &'a [Vec<Vec<f64>>],
    /// Upper clip of the next-step value.
    pub clip_hi: f64,
}

/// Regularized least-squares fit of the Bellman targets
/// `y_i = r_i + clip(max_a <phi_{t+1}(s'_i, a), theta_next>, 0, hi)`
/// (`y_i = r_i` at the last step), straight from the raw samples.
pub fn lsq_center(gram: &GramState, next: Option<NextStep<'_>>) -> Result<Vec<f64>> {
    let d = gram.dim();
    let mut rhs = vec![0.0; d];
    for sample in &gram.samples {
        let mut y = sample.transition.reward;
        if let Some(next) = next {
            let row = next.features.get(sample.transition.next_state).ok_or_else(|| {
                AgentError::InvalidConfig(format!("next state {} has no features", sample.transition.next_state))
            })?;
            let mut best = f64::NEG_INFINITY;
            for f in row {
                if f.len() != next.theta.len() {
                    return Err(AgentError::DimensionMismatch { expected: f.len(), got: next.theta.len() });
                }
                best = best.max(dot(f, next.theta));
            }
            y += best.clamp(0.0, next.clip_hi);
        }
        for (r, x) in rhs.iter_mut().zip(&sample.phi) {
            *r += x * y;
        }
    }
    Ok(gram.sigma.solve(&rhs)?)
}

/// Same fit as [`lsq_center`] built from the cached moments: the right-hand
/// side is `reward_moment + sum_{s'} next_moments[s'] * next_values[s']`.
/// `next_values` are the already clipped next-step values (`None` at the last
/// step).
pub(crate) fn center_from_moments(gram: &GramState, next_values: Option<&[f64]>) -> Vec<f64> {
    let mut rhs = gram.reward_moment.clone();
    if let Some(values) = next_values {
        for (m, &v) in gram.next_moments.iter().zip(values) {
            if v != 0.0 {
                for (r, x) in rhs.iter_mut().zip(m) {
                    *r += x * v;
                }
            }
        }
    }
    gram.sigma.solve_in_place(&mut rhs);
    rhs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tr(reward: f64, next_state: usize) -> Transition {
        Transition { t: 0, s: 0, a: 0, reward, next_state }
    }

    #[test]
    fn empty_dataset_gives_zero() {
        let g = GramState::new(3, 2, 1.0).unwrap();
        assert_eq!(lsq_center(&g, None).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn single_sample_by_hand() {
        let mut g = GramState::new(2, 1, 1.0).unwrap();
        g.push(tr(1.0, 0), &[1.0, 0.0]).unwrap();
        let th = lsq_center(&g, None).unwrap();
        assert!((th[0] - 0.5).abs() < 1e-15 && th[1] == 0.0, "{th:?}");
    }

    #[test]
    fn reconstruction_matches_updates() {
        let mut g = GramState::new(2, 2, 0.5).unwrap();
        for i in 0..20 {
            let x = i as f64 * 0.37;
            g.push(tr(0.3, i % 2), &[x.sin() * 0.7, x.cos() * 0.7]).unwrap();
            let rebuilt = g.reconstruct_sigma();
            for (a, b) in rebuilt.iter().zip(g.sigma().entries()) {
                assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
        assert!(GramState::new(2, 2, 0.0).is_err());
        assert!(g.push(tr(0.0, 0), &[1.0]).is_err());
    }

    #[test]
    fn moment_route_matches_raw_route() {
        let next_features = vec![vec![vec![0.6, 0.1], vec![-0.2, 0.9]], vec![vec![0.3, -0.4], vec![0.0, 0.5]]];
        let theta = [1.3, 0.7];
        let mut g = GramState::new(2, 2, 0.7).unwrap();
        for i in 0..30 {
            let x = i as f64;
            g.push(tr((x * 0.13).fract(), i % 2), &[(x * 0.9).sin() * 0.5, (x * 0.4).cos() * 0.5]).unwrap();
        }
        let values: Vec<f64> = next_features
            .iter()
            .map(|row| row.iter().map(|f| dot(f, &theta)).fold(f64::NEG_INFINITY, f64::max).clamp(0.0, 2.0))
            .collect();
        let raw = lsq_center(&g, Some(NextStep { theta: &theta, features: &next_features, clip_hi: 2.0 })).unwrap();
        let fast = center_from_moments(&g, Some(&values));
        for (a, b) in raw.iter().zip(&fast) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(center_from_moments(&g, None), lsq_center(&g, None).unwrap());
    }

    #[test]
    fn permuting_the_dataset_keeps_the_center() {
        let data: Vec<(f64, usize, [f64; 2])> =
            (0..12).map(|i| ((i as f64 * 0.31).fract(), i % 3, [(i as f64).sin() * 0.6, (i as f64).cos() * 0.6])).collect();
        let mut g1 = GramState::new(2, 3, 1.0).unwrap();
        let mut g2 = GramState::new(2, 3, 1.0).unwrap();
        for (r, s, phi) in &data {
            g1.push(tr(*r, *s), phi).unwrap();
        }
        for (r, s, phi) in data.iter().rev() {
            g2.push(tr(*r, *s), phi).unwrap();
        }
        let a = lsq_center(&g1, None).unwrap();
        let b = lsq_center(&g2, None).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn targets_use_clipped_next_value() {
        let next_features = vec![vec![vec![1.0], vec![0.5]], vec![vec![-1.0], vec![-0.5]]];
        let mut g = GramState::new(1, 2, 1.0).unwrap();
        g.push(tr(0.25, 0), &[1.0]).unwrap();
        g.push(tr(0.25, 1), &[1.0]).unwrap();
        let theta = [3.0];
        let next = NextStep { theta: &theta, features: &next_features, clip_hi: 2.0 };
        // targets: 0.25 + min(3, 2) = 2.25 and 0.25 + max(-1.5, 0) = 0.25
        let th = lsq_center(&g, Some(next)).unwrap();
        assert!((th[0] - 2.5 / 3.0).abs() < 1e-15);
    }
}
