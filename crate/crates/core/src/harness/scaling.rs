/// Least-squares line through `(ln k, ln R_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// Episodes `[lo, hi]` (1-based, inclusive) used in the fit.
    pub window: (usize, usize),
    /// Set when the fit could not be computed; slope and intercept are NaN.
    pub flag: Option<String>,
}

impl ScalingFit {
    pub fn is_ok(&self) -> bool {
        self.flag.is_none()
    }

    fn flagged(window: (usize, usize), why: String) -> Self {
        Self { slope: f64::NAN, intercept: f64::NAN, window, flag: Some(why) }
    }
}

/// Episodes `[max(1, K/2), K]`.
pub fn default_window(episodes: usize) -> (usize, usize) {
    ((episodes / 2).max(1), episodes)
}

/// Fits `ln R_k = intercept + slope ln k` over the window, where
/// `cumulative[k - 1] = R_k`. Nonpositive regret or a degenerate window gives
/// a flagged result instead of an error.
pub fn fit_scaling(cumulative: &[f64], window: (usize, usize)) -> ScalingFit {
    let (lo, hi) = window;
    if lo == 0 || hi > cumulative.len() || lo >= hi {
        return ScalingFit::flagged(window, format!("window [{lo}, {hi}] invalid for {} episodes", cumulative.len()));
    }
    if let Some(k) = (lo..=hi).find(|&k| !(cumulative[k - 1] > 0.0)) {
        return ScalingFit::flagged(window, format!("nonpositive cumulative regret {} at episode {k}", cumulative[k - 1]));
    }
    let n = (hi - lo + 1) as f64;
    let xs = (lo..=hi).map(|k| (k as f64).ln());
    let ys = (lo..=hi).map(|k| cumulative[k - 1].ln());
    let mx = xs.clone().sum::<f64>() / n;
    let my = ys.clone().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    ScalingFit { slope, intercept: my - slope * mx, window, flag: None }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(f: impl Fn(f64) -> f64, n: usize) -> Vec<f64> {
        (1..=n).map(|k| f(k as f64)).collect()
    }

    #[test]
    fn exact_power_laws() {
        let fit = fit_scaling(&curve(f64::sqrt, 1000), default_window(1000));
        assert!((fit.slope - 0.5).abs() < 1e-9);
        assert!(fit.intercept.abs() < 1e-9);
        let fit = fit_scaling(&curve(|k| k, 1000), (1, 1000));
        assert!((fit.slope - 1.0).abs() < 1e-9);
    }

    #[test]
    fn noisy_power_law() {
        use rand::Rng;
        let mut rng = crate::rng::stream(3, crate::rng::StreamKind::Instance, &[]);
        let c: Vec<f64> = (1..=2000).map(|k| 3.0 * (k as f64).powf(0.7) * (1.0 + rng.random_range(-0.01..0.01))).collect();
        let fit = fit_scaling(&c, default_window(2000));
        assert!((0.68..=0.72).contains(&fit.slope), "{}", fit.slope);
    }

    #[test]
    fn flags_instead_of_failing() {
        let fit = fit_scaling(&[0.0, 0.0, 1.0], (1, 3));
        assert!(!fit.is_ok() && fit.slope.is_nan());
        assert!(!fit_scaling(&[1.0, 2.0], (1, 5)).is_ok());
        assert!(!fit_scaling(&[1.0, 2.0], (2, 2)).is_ok());
    }
}
