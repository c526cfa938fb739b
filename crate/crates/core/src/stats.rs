//! Two-sample Z-test on mean target errors.

use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{Error, Result};
use crate::metrics::{ExperimentSummary, PooledStats};

/// Standard normal CDF, via the complementary error function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// `P(|Z| ≥ |z|)` for a standard normal `Z`.
pub fn two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZTestResult {
    /// `|mean1 − mean2| / sqrt(se1² + se2²)`, never negative.
    pub z: f64,
    pub p_two_sided: f64,
    pub se1: f64,
    pub se2: f64,
    /// `mean1 − mean2`, signed.
    pub mean_diff: f64,
}

pub fn z_test(mean1: f64, sd1: f64, n1: usize, mean2: f64, sd2: f64, n2: usize) -> Result<ZTestResult> {
    if n1 < 2 || n2 < 2 {
        return Err(Error::InvalidArgument(format!(
            "sample sizes must be at least 2 (got {n1} and {n2})"
        )));
    }
    if !(sd1 >= 0.0 && sd2 >= 0.0) {
        return Err(Error::InvalidArgument("standard deviations must be non-negative".into()));
    }
    if !(mean1.is_finite() && mean2.is_finite() && sd1.is_finite() && sd2.is_finite()) {
        return Err(Error::InvalidArgument("inputs must be finite".into()));
    }
    let se1 = sd1 / (n1 as f64).sqrt();
    let se2 = sd2 / (n2 as f64).sqrt();
    let pooled = se1 * se1 + se2 * se2;
    if pooled == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let mean_diff = mean1 - mean2;
    let z = mean_diff.abs() / pooled.sqrt();
    Ok(ZTestResult {
        z,
        p_two_sided: two_sided_p(z),
        se1,
        se2,
        mean_diff,
    })
}

/// Which pooled statistics feed a between-experiment test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// Trial summaries: mean of trial means, averaged SD column, n = Σ fiducials.
    #[default]
    Summary,
    /// Mean and SD over every fiducial-level error.
    Exact,
}

impl std::str::FromStr for Pooling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "summary" => Ok(Pooling::Summary),
            "exact" => Ok(Pooling::Exact),
            other => Err(Error::InvalidArgument(format!("unknown pooling {other:?}"))),
        }
    }
}

pub fn pooled(summary: &ExperimentSummary, pooling: Pooling) -> Result<PooledStats> {
    match pooling {
        Pooling::Summary => Ok(summary.pooled_from_summaries()),
        Pooling::Exact => summary.pooled_exact().ok_or_else(|| {
            Error::InvalidArgument(format!(
                "{} trials lack fiducial-level errors; exact pooling unavailable",
                summary.experiment_kind
            ))
        }),
    }
}

/// Z-test between two experiments.
pub fn compare_experiments(a: &ExperimentSummary, b: &ExperimentSummary, pooling: Pooling) -> Result<ZTestResult> {
    let (pa, pb) = (pooled(a, pooling)?, pooled(b, pooling)?);
    z_test(pa.mean, pa.sd, pa.n, pb.mean, pb.sd, pb.n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cdf_anchor_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        let c = normal_cdf(1.96);
        assert!((0.9749..=0.9751).contains(&c), "{c}");
        assert_abs_diff_eq!(normal_cdf(-1.0) + normal_cdf(1.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn identical_samples() {
        let r = z_test(5.0, 2.0, 30, 5.0, 2.0, 30).unwrap();
        assert_eq!(r.z, 0.0);
        assert_eq!(r.p_two_sided, 1.0);
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        assert!(matches!(z_test(1.0, 0.0, 10, 2.0, 0.0, 10), Err(Error::DegenerateVariance)));
        assert!(z_test(1.0, 1.0, 1, 2.0, 1.0, 10).is_err());
        assert!(z_test(1.0, -1.0, 10, 2.0, 1.0, 10).is_err());
        assert!(z_test(f64::NAN, 1.0, 10, 2.0, 1.0, 10).is_err());
    }

    #[test]
    fn physical_vs_holographic() {
        let r = z_test(6.98, 3.04, 48, 11.99, 2.99, 48).unwrap();
        assert!((8.0..=8.3).contains(&r.z), "{}", r.z);
        assert!(r.p_two_sided < 1e-4);
        assert_abs_diff_eq!(r.se1, 3.04 / 48f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.mean_diff, 6.98 - 11.99, epsilon = 1e-15);
    }

    #[test]
    fn holographic_vs_none() {
        let r = z_test(11.99, 2.99, 48, 12.75, 2.94, 48).unwrap();
        assert!((1.2..=1.3).contains(&r.z), "{}", r.z);
        assert!((0.19..=0.22).contains(&r.p_two_sided), "{}", r.p_two_sided);
    }
}
