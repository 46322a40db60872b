//! Two-sample Kolmogorov-Smirnov test with the large-sample critical value.

use crate::error::{Error, Result};

/// Outcome of a two-sample KS test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    /// Supremum distance between the two empirical CDFs.
    pub statistic: f64,
    pub critical: f64,
    /// `statistic > critical`.
    pub reject: bool,
    pub alpha: f64,
    pub n: usize,
    pub m: usize,
}

/// `c(alpha) = sqrt(-ln(alpha / 2) / 2)`; 1.358 at alpha = 0.05.
pub fn critical_coefficient(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Param(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok((-0.5 * (alpha / 2.0).ln()).sqrt())
}

fn sorted(xs: &[f64], which: &str) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::EmptySample(format!("KS sample {which}")));
    }
    if xs.iter().any(|v| v.is_nan()) {
        return Err(Error::Input(format!("NaN in KS sample {which}")));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// KS distance of two sorted samples, walking both in one merge pass.
fn statistic_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Two-sample KS statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(statistic_sorted(&sorted(a, "a")?, &sorted(b, "b")?))
}

/// Tests whether `a` and `b` come from the same continuous distribution.
pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> Result<KsResult> {
    let c = critical_coefficient(alpha)?;
    let statistic = ks_statistic(a, b)?;
    let (n, m) = (a.len(), b.len());
    let critical = c * (((n + m) as f64) / ((n * m) as f64)).sqrt();
    Ok(KsResult {
        statistic,
        critical,
        reject: statistic > critical,
        alpha,
        n,
        m,
    })
}
