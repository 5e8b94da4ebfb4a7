use serde::{Deserialize, Serialize};

use super::{AgentError, Result};

/// Confidence-radius constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadiusConfig {
    /// Ridge regularizer of every Gram matrix.
    pub lambda: f64,
    /// Failure probability, split over `2 H K_max` events.
    pub delta: f64,
    /// Scale of reward noise added to the value-range scale.
    pub sigma_noise: f64,
    /// Misspecification level fed to the inflation term.
    pub ibe_term: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl Default for RadiusConfig {
    fn default() -> Self {
        Self { lambda: 1.0, delta: 0.05, sigma_noise: 0.0, ibe_term: 0.0, c1: 1.0, c2: 1.0, c3: 1.0 }
    }
}

impl RadiusConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| AgentError::InvalidConfig(format!("{what} = {v}"));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(bad("lambda must be positive", self.lambda));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(bad("delta must lie in (0, 1)", self.delta));
        }
        for (name, v) in [
            ("sigma_noise", self.sigma_noise),
            ("ibe_term", self.ibe_term),
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(bad(&format!("{name} must be nonnegative"), v));
            }
        }
        Ok(())
    }

    /// Same constants with every multiplier zeroed (no optimism).
    pub fn zeroed(&self) -> Self {
        Self { c1: 0.0, c2: 0.0, c3: 0.0, ..self.clone() }
    }
}

/// Where and when a radius is evaluated. `t` is 0-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusInputs {
    pub horizon: usize,
    pub t: usize,
    pub dim: usize,
    /// Radius of the parameter ball at step `t`.
    pub ball_radius: f64,
    /// Episode index, starting at 1.
    pub k: usize,
    pub k_max: usize,
}

/// `c1 sigma_v sqrt(d ln((lambda + k) / (lambda delta'))) + c2 sqrt(lambda) D + c3 ibe sqrt(d k)`
/// with `delta' = delta / (2 H K_max)` and `sigma_v = (H - t - 1) + sigma_noise`.
pub fn radius(cfg: &RadiusConfig, at: &RadiusInputs) -> f64 {
    let h = at.horizon as f64;
    let d = at.dim as f64;
    let k = at.k.max(1) as f64;
    let delta_prime = cfg.delta / (2.0 * h * at.k_max.max(1) as f64);
    let sigma_v = (h - at.t as f64 - 1.0).max(0.0) + cfg.sigma_noise;
    let log_term = ((cfg.lambda + k) / (cfg.lambda * delta_prime)).ln().max(0.0);
    let statistical = if cfg.c1 == 0.0 { 0.0 } else { cfg.c1 * sigma_v * (d * log_term).sqrt() };
    let prior = cfg.c2 * cfg.lambda.sqrt() * at.ball_radius;
    let inflation = cfg.c3 * cfg.ibe_term * (d * k).sqrt();
    statistical + prior + inflation
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(k: usize) -> RadiusInputs {
        RadiusInputs { horizon: 3, t: 0, dim: 4, ball_radius: 8.0, k, k_max: 1000 }
    }

    #[test]
    fn no_data_limit_is_prior_term() {
        let cfg = RadiusConfig { c1: 1e-9, ..RadiusConfig::default() };
        let r = radius(&cfg, &inputs(1));
        assert!((r - 8.0).abs() < 1e-6, "{r}");
    }

    #[test]
    fn inflation_grows_like_sqrt_k() {
        let cfg = RadiusConfig { c1: 0.0, c2: 0.0, ibe_term: 0.1, ..RadiusConfig::default() };
        let ratio = radius(&cfg, &inputs(200)) / radius(&cfg, &inputs(100));
        assert!((ratio - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn default_expression_by_hand() {
        // first step of a 3-step problem: sigma_v = 2
        let cfg = RadiusConfig { ibe_term: 0.1, ..RadiusConfig::default() };
        let delta_prime: f64 = 0.05 / 6000.0;
        let expect = 2.0 * (4.0 * (101.0 / delta_prime).ln()).sqrt() + 8.0 + 0.1 * 20.0;
        assert!((radius(&cfg, &inputs(100)) - expect).abs() < 1e-12);
    }

    #[test]
    fn zeroed_radius_is_zero() {
        let cfg = RadiusConfig { ibe_term: 0.3, sigma_noise: 1.0, ..RadiusConfig::default() }.zeroed();
        assert_eq!(radius(&cfg, &inputs(50)), 0.0);
    }

    #[test]
    fn validation() {
        assert!(RadiusConfig::default().validate().is_ok());
        assert!(RadiusConfig { lambda: 0.0, ..RadiusConfig::default() }.validate().is_err());
        assert!(RadiusConfig { delta: 1.0, ..RadiusConfig::default() }.validate().is_err());
        assert!(RadiusConfig { c3: -1.0, ..RadiusConfig::default() }.validate().is_err());
    }
}
