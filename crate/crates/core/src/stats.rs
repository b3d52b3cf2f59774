//! Summary statistics for Monte-Carlo replications.

use serde::Serialize;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Mean of independent replicate values with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl MeanEstimate {
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return MeanEstimate {
                mean: f64::NAN,
                std_error: f64::NAN,
                samples: 0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            f64::NAN
        };
        MeanEstimate {
            mean,
            std_error,
            samples: n,
        }
    }
}

/// A pooled binomial proportion together with a replication-based
/// standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    /// Pooled ratio `successes / trials`.
    pub value: f64,
    /// Standard error of the pooled ratio. Uses the spread of the
    /// per-replication ratios when at least two replications exist, the
    /// binomial formula otherwise.
    pub std_error: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl Proportion {
    /// `parts` holds `(successes, trials)` for each replication.
    pub fn from_replications(parts: &[(u64, u64)]) -> Self {
        let successes: u64 = parts.iter().map(|p| p.0).sum();
        let trials: u64 = parts.iter().map(|p| p.1).sum();
        let value = if trials > 0 {
            successes as f64 / trials as f64
        } else {
            f64::NAN
        };
        let ratios: Vec<f64> = parts
            .iter()
            .filter(|p| p.1 > 0)
            .map(|p| p.0 as f64 / p.1 as f64)
            .collect();
        let binomial = if trials > 0 {
            (value * (1.0 - value) / trials as f64).sqrt()
        } else {
            f64::NAN
        };
        let std_error = if ratios.len() >= 2 {
            MeanEstimate::from_samples(&ratios).std_error
        } else {
            binomial
        };
        let (wilson_low, wilson_high) = wilson_interval(successes, trials, Z_95);
        Proportion {
            successes,
            trials,
            value,
            std_error,
            wilson_low,
            wilson_high,
        }
    }
}
