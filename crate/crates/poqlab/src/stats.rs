//! Small statistical helpers shared by experiments and tests.

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Standard deviation of a binomial proportion.
pub fn binomial_sigma(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Whether an observed proportion lies within `k` standard deviations of `p`.
///
/// A continuity correction of `1/(2·trials)` is added so that degenerate
/// probabilities (0 or 1) still accept the only possible outcome.
pub fn within_sigmas(observed: f64, p: f64, trials: u64, k: f64) -> bool {
    (observed - p).abs() <= k * binomial_sigma(p, trials) + 0.5 / trials as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_known_value() {
        // 81 of 263 at 95%: (0.2553, 0.3662), a textbook example.
        let (lo, hi) = wilson_interval(81, 263, 1.959964);
        assert!((lo - 0.2553).abs() < 1e-3);
        assert!((hi - 0.3662).abs() < 1e-3);
    }

    #[test]
    fn wilson_edges() {
        let (lo, hi) = wilson_interval(0, 10, 1.96);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.2 && hi < 0.35);
        assert_eq!(wilson_interval(0, 0, 1.96), (0.0, 1.0));
    }

    #[test]
    fn sigma_window() {
        assert!(within_sigmas(1.0, 1.0, 100, 3.0));
        assert!(!within_sigmas(0.9, 1.0, 100, 3.0));
        assert!(within_sigmas(0.52, 0.5, 1000, 3.0));
    }
}
