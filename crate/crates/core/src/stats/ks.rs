use std::f64::consts::PI;

use super::report::StatReport;
use super::TEST_LEVEL;
use crate::error::{Error, Result};

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
///
/// Uses the theta-function series for small arguments and the alternating
/// series otherwise; both are truncated well below 1e-15.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let a = -PI * PI / (8.0 * lambda * lambda);
        let s: f64 = (1..=20)
            .map(|k| {
                let j = (2 * k - 1) as f64;
                (a * j * j).exp()
            })
            .sum();
        (1.0 - (2.0 * PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                let kf = k as f64;
                sign * (-2.0 * kf * kf * lambda * lambda).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// Asymptotic p-value with the usual small-sample correction of the
/// effective size.
fn ks_pvalue(d: f64, effective_n: f64) -> f64 {
    let en = effective_n.sqrt();
    kolmogorov_sf((en + 0.12 + 0.11 / en) * d)
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

/// One-sample KS test of `samples` against a continuous CDF.
pub fn ks_one_sample(name: &str, samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<StatReport> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("ks sample"));
    }
    let xs = sorted(samples);
    let n = xs.len() as f64;
    let d = xs.iter().enumerate().fold(0.0f64, |acc, (i, &x)| {
        let f = cdf(x);
        acc.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    });
    Ok(
        StatReport::pvalue_test(name, d, ks_pvalue(d, n), TEST_LEVEL)
            .with_samples([xs.len() as u64]),
    )
}

/// Sup distance between the empirical CDFs of two samples.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("ks two-sample input"));
    }
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
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
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    // Once one side is exhausted its CDF is 1 and the other only increases.
    Ok(d.max((i as f64 / na - j as f64 / nb).abs()))
}

/// Two-sample KS test with the asymptotic Kolmogorov p-value.
pub fn ks_two_sample(name: &str, a: &[f64], b: &[f64]) -> Result<StatReport> {
    let d = ks_distance(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    Ok(
        StatReport::pvalue_test(name, d, ks_pvalue(d, na * nb / (na + nb)), TEST_LEVEL)
            .with_samples([a.len() as u64, b.len() as u64]),
    )
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}
