//! Monte Carlo building blocks shared by the verification suites, and the
//! convergence study that sweeps them over a list of sample sizes.

use serde::Serialize;

use crate::coupling::lemma3_decay_study;
use crate::empirical::{empirical_process, glivenko_cantelli_stat, sup_abs_process, EmpiricalSample};
use crate::error::{invalid, Result};
use crate::reference::{continuous_sup_abs, sample_brownian_bridge};
use crate::replicate::{replicate, replicate_fold};
use crate::rng::derive_seed;
use crate::stats::{bridge_covariance, ks_two_sample, CovAccumulator};

/// Moments of `(b_n(t_1), .., b_n(t_d))` over `reps` samples of size n.
pub fn empirical_covariance(n: usize, times: &[f64], reps: u64, seed: u64) -> Result<CovAccumulator> {
    if n == 0 || times.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(invalid("covariance needs n >= 1 and times in [0, 1]"));
    }
    Ok(replicate_fold(
        derive_seed(seed, &format!("bn-cov/n={n}")),
        reps,
        || CovAccumulator::new(times.len()),
        |acc, rng| {
            let s = EmpiricalSample::sample(n, rng).expect("n >= 1");
            let row: Vec<f64> = times
                .iter()
                .map(|&t| empirical_process(&s, t).expect("t checked"))
                .collect();
            acc.push(&row);
        },
        CovAccumulator::merge,
    ))
}

/// Largest entrywise deviation of the empirical-process covariance from
/// `s(1 - t)`.
pub fn max_covariance_error(acc: &CovAccumulator, times: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for (i, &s) in times.iter().enumerate() {
        for (j, &t) in times.iter().enumerate() {
            worst = worst.max((acc.covariance(i, j) - bridge_covariance(s, t)).abs());
        }
    }
    worst
}

/// `reps` draws of `sup |b_n|`.
pub fn sup_empirical_samples(n: usize, reps: u64, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    Ok(replicate(derive_seed(seed, &format!("sup-bn/n={n}")), reps, |rng| {
        sup_abs_process(&EmpiricalSample::sample(n, rng).expect("n >= 1"))
    }))
}

/// `reps` draws of `sup |b|` for the reference Brownian bridge simulated on
/// the grid `k/m`, with the sup taken over continuous time (see
/// [`continuous_sup_abs`]). The plain grid maximum is biased low by about
/// `0.58/sqrt(m)`, enough to fail a 10^4-sample KS test at m = 4096.
pub fn sup_bridge_samples(m: usize, reps: u64, seed: u64) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(invalid("grid size must be at least 1"));
    }
    Ok(replicate(derive_seed(seed, &format!("sup-bridge/m={m}")), reps, |rng| {
        let b = sample_brownian_bridge(m, rng).expect("m >= 1");
        continuous_sup_abs(&b, rng)
    }))
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    assert!(!xs.is_empty(), "median of an empty sample");
    xs.sort_unstable_by(f64::total_cmp);
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        0.5 * (xs[mid - 1] + xs[mid])
    }
}

/// Median of `sup |F_n - F|` over `reps` samples.
pub fn glivenko_cantelli_median(n: usize, reps: u64, seed: u64) -> Result<f64> {
    if n == 0 || reps == 0 {
        return Err(invalid("n and reps must be at least 1"));
    }
    Ok(median(replicate(derive_seed(seed, &format!("gc/n={n}")), reps, |rng| {
        glivenko_cantelli_stat(&EmpiricalSample::sample(n, rng).expect("n >= 1"))
    })))
}

#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub n_list: Vec<usize>,
    pub reps: u64,
    pub seed: u64,
    /// Time at which the correction is compared with `-t S_n`.
    pub t: f64,
    pub epsilon: f64,
    /// Times for the covariance comparison.
    pub times: Vec<f64>,
}

/// One row of the convergence study.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyRow {
    pub n: usize,
    pub lemma3_estimate: f64,
    pub lemma3_stderr: f64,
    pub lemma3_frequency: f64,
    pub cov_max_error: f64,
    pub ks_statistic: f64,
    pub ks_pvalue: f64,
    pub gc_median: f64,
}

/// Sweeps n over `config.n_list`, one [`StudyRow`] per n.
pub fn study_convergence(config: &StudyConfig) -> Result<Vec<StudyRow>> {
    if config.n_list.is_empty() || config.reps < 2 {
        return Err(invalid("study needs a nonempty n list and reps >= 2"));
    }
    let decay = lemma3_decay_study(
        &config.n_list,
        config.t,
        config.epsilon,
        config.reps,
        config.seed,
        f64::INFINITY,
    )?;
    let mut rows = Vec::with_capacity(config.n_list.len());
    for (&n, d) in config.n_list.iter().zip(&decay.rows) {
        let cov = empirical_covariance(n, &config.times, config.reps, config.seed)?;
        let ks = ks_two_sample(
            "sup",
            &sup_empirical_samples(n, config.reps, config.seed)?,
            &sup_bridge_samples(n, config.reps, config.seed)?,
        )?;
        rows.push(StudyRow {
            n,
            lemma3_estimate: d.estimate,
            lemma3_stderr: d.stderr,
            lemma3_frequency: d.frequency,
            cov_max_error: max_covariance_error(&cov, &config.times),
            ks_statistic: ks.statistic,
            ks_pvalue: ks.pvalue.unwrap_or(f64::NAN),
            gc_median: glivenko_cantelli_median(n, config.reps, config.seed)?,
        });
    }
    Ok(rows)
}

pub fn write_study_csv<W: std::io::Write>(rows: &[StudyRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn small_study_shape() {
        let cfg = StudyConfig {
            n_list: vec![10, 20, 40],
            reps: 200,
            seed: 1,
            t: 0.5,
            epsilon: 0.5,
            times: vec![0.25, 0.5, 0.75],
        };
        let rows = study_convergence(&cfg).unwrap();
        assert_eq!(rows.len(), 3);
        let mut buf = Vec::new();
        write_study_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with(
            "n,lemma3_estimate,lemma3_stderr,lemma3_frequency,cov_max_error,ks_statistic,ks_pvalue,gc_median\n"
        ));
        assert_eq!(study_convergence(&cfg).unwrap(), rows);
    }
}
