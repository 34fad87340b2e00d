use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Significance level for all tests.
pub const ALPHA: f64 = 0.05;

/// Mean with Neumaier-compensated summation.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    compensated_sum(values.iter().copied()) / values.len() as f64
}

pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Outcome of a two-sided paired t-test with Bonferroni correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    pub t_statistic: f64,
    pub p_value: f64,
    /// `min(1, p · test_count)`
    pub corrected_p: f64,
    pub n: usize,
    /// Mean of `a - b`.
    pub mean_difference: f64,
    /// `corrected_p < 0.05`
    pub significant: bool,
}

/// Two-sided paired Student's t-test of `a` against `b` with `n - 1`
/// degrees of freedom.
///
/// All-zero differences yield `t = 0, p = 1`. Constant non-zero
/// differences have zero variance and yield an infinite `t` with `p = 0`.
pub fn paired_t_test(a: &[f64], b: &[f64], test_count: usize) -> Result<SignificanceResult> {
    if a.len() != b.len() {
        return Err(Error::Input(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::Input(format!("paired t-test needs at least 2 pairs, got {n}")));
    }
    if test_count == 0 {
        return Err(Error::Parameter("test count must be at least 1".into()));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::Input("paired samples contain non-finite values".into()));
    }

    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean_difference = mean(&diffs);
    let nf = n as f64;
    let variance = compensated_sum(diffs.iter().map(|d| (d - mean_difference).powi(2))) / (nf - 1.0);

    let (t_statistic, p_value) = if diffs.iter().all(|&d| d == 0.0) {
        (0.0, 1.0)
    } else if variance == 0.0 {
        (mean_difference.signum() * f64::INFINITY, 0.0)
    } else {
        let t = mean_difference / (variance / nf).sqrt();
        let dist = StudentsT::new(0.0, 1.0, nf - 1.0).expect("degrees of freedom are positive");
        let p = (2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0);
        (t, p)
    };

    let corrected_p = (p_value * test_count as f64).min(1.0);
    Ok(SignificanceResult {
        t_statistic,
        p_value,
        corrected_p,
        n,
        mean_difference,
        significant: corrected_p < ALPHA,
    })
}
