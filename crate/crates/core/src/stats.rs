//! Small statistical helpers: Gaussian tail, Wilson bounds, t-intervals.

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};
use statrs::function::erf::erfc;

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile for a one-sided bound at `confidence`.
pub fn z_one_sided(confidence: f64) -> f64 {
    Normal::standard().inverse_cdf(confidence)
}

/// One-sided Wilson score upper bound for a binomial rate.
///
/// Returns 1.0 when there are no trials.
pub fn wilson_upper(successes: u64, trials: u64, confidence: f64) -> f64 {
    if trials == 0 {
        return 1.0;
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = z_one_sided(confidence);
    let z2 = z * z;
    let center = p + z2 / (2.0 * n);
    let spread = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center + spread) / (1.0 + z2 / n)).min(1.0)
}

/// One-sided Wilson score lower bound for a binomial rate.
pub fn wilson_lower(successes: u64, trials: u64, confidence: f64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = z_one_sided(confidence);
    let z2 = z * z;
    let center = p + z2 / (2.0 * n);
    let spread = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - spread) / (1.0 + z2 / n)).max(0.0)
}

/// Lower one-sided Student-t confidence bound on the mean of `samples`.
///
/// Needs at least two samples; returns `None` otherwise.
pub fn t_lower_bound(samples: &[f64], confidence: f64) -> Option<f64> {
    let n = samples.len();
    if n < 2 {
        return None;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .ok()?
        .inverse_cdf(confidence);
    Some(mean - t * (var / n as f64).sqrt())
}
