//! Pre-registered verification suites.
//!
//! Every check runs from [`REGISTERED_SEED`] unless a seed is passed
//! explicitly; each check derives its own seed from a label, so adding or
//! reordering checks leaves the others unchanged.

use std::str::FromStr;
use std::time::Instant;

use crate::bernoulli::{all_paths, bridge_law, duchon_flip, fast_flip, flip_law, sample_uniform_bridge, SignPath};
use crate::coupling::{joint_covariance_check, lemma3_decay_study, marginal_binomial_check, sample_coupled};
use crate::dist::sample_multinomial_uniform;
use crate::empirical::{interpolation_gap, max_cell_tail_bound, cell_counts, EmpiricalSample};
use crate::error::{invalid, Error, Result};
use crate::reference::{sample_brownian_bridge, sample_brownian_motion};
use crate::replicate::{replicate_fold, try_replicate_fold};
use crate::rng::derive_seed;
use crate::stats::{
    bridge_covariance, chi_square_gof, chi_square_homogeneity, combine_chi_square, covariance_check,
    ks_two_sample, multinomial_identity_holds, tv_distance, CovAccumulator, StatReport, Tally,
};
use crate::study::{empirical_covariance, glivenko_cantelli_median, max_covariance_error, sup_bridge_samples, sup_empirical_samples};
use crate::walk::conditioned_walk_law;

pub const REGISTERED_SEED: u64 = 20_070_615;

const COV_TIMES: [f64; 3] = [0.25, 0.5, 0.75];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Coupling,
    Duchon,
    Empirical,
    Reference,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coupling" => Ok(Suite::Coupling),
            "duchon" => Ok(Suite::Duchon),
            "empirical" => Ok(Suite::Empirical),
            "reference" => Ok(Suite::Reference),
            "all" => Ok(Suite::All),
            other => Err(invalid(format!("unknown suite {other:?}"))),
        }
    }
}

/// One named group of checks.
#[derive(Clone, Copy)]
pub struct Check {
    pub name: &'static str,
    pub run: fn(u64) -> Result<Vec<StatReport>>,
}

const COUPLING: [Check; 5] = [
    Check { name: "coupling-exactness", run: coupling_exactness },
    Check { name: "binomial-marginals", run: binomial_marginals },
    Check { name: "multinomial-identity", run: |_| multinomial_identity() },
    Check { name: "correction-decay", run: correction_decay },
    Check { name: "joint-covariance", run: joint_covariance },
];
const DUCHON: [Check; 2] = [
    Check { name: "duchon-uniformity", run: duchon_uniformity },
    Check { name: "bernoulli-bridge-variance", run: bernoulli_bridge_variance },
];
const EMPIRICAL: [Check; 4] = [
    Check { name: "interpolation-bound", run: interpolation_bound },
    Check { name: "max-cell-tail", run: max_cell_tail },
    Check { name: "empirical-limit", run: empirical_limit },
    Check { name: "glivenko-cantelli-rate", run: glivenko_cantelli_rate },
];
const REFERENCE: [Check; 1] = [Check { name: "reference-covariances", run: reference_covariances }];

pub fn checks(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::Coupling => COUPLING.to_vec(),
        Suite::Duchon => DUCHON.to_vec(),
        Suite::Empirical => EMPIRICAL.to_vec(),
        Suite::Reference => REFERENCE.to_vec(),
        Suite::All => [&COUPLING[..], &DUCHON, &EMPIRICAL, &REFERENCE].concat(),
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<StatReport>> {
    let mut out = Vec::new();
    for check in checks(suite) {
        out.extend((check.run)(seed)?);
    }
    Ok(out)
}

/// Law of `S + C` against the enumerated conditioned-walk law for
/// `n in {2, 3, 4}`, 10^6 draws each.
pub fn coupling_exactness(seed: u64) -> Result<Vec<StatReport>> {
    let start = Instant::now();
    let reps = 1_000_000;
    let mut out = Vec::new();
    for n in [2usize, 3, 4] {
        let law = conditioned_walk_law(n)?;
        let tally = try_replicate_fold(
            derive_seed(seed, &format!("coupling/n={n}")),
            reps,
            Tally::new,
            |t, rng| {
                t.record(sample_coupled(n, rng)?.bridge.values().to_vec());
                Ok::<(), Error>(())
            },
            Tally::merge,
        )?;
        let tv = tv_distance(&tally, &law)?;
        out.push(StatReport::below(format!("TV(S+C, conditioned walk) (n={n})"), tv, 0.005).with_samples([reps]));
        out.push(chi_square_gof(&format!("chi-square S+C vs conditioned walk (n={n})"), &tally, &law)?);
    }
    out.push(
        StatReport::below("coupling exactness runtime (s)", start.elapsed().as_secs_f64(), 120.0)
            .with_meta("clock", "wall"),
    );
    Ok(out)
}

pub fn binomial_marginals(seed: u64) -> Result<Vec<StatReport>> {
    let mut out = Vec::new();
    for (n, k, m) in [(4usize, 2usize, 1i64), (4, 2, 2), (4, 3, 2)] {
        for s in [m, -m] {
            out.push(marginal_binomial_check(n, k, s, 100_000, seed)?);
        }
    }
    Ok(out)
}

/// Uniformity of the flipped bridge for `two_n in {2, 4, 6, 8}` and, for
/// every input path with `two_n <= 6`, agreement of the faithful and fast
/// flips with the exact flip law. The per-input chi-squares are pooled so
/// each family is one test at the 1% level.
pub fn duchon_uniformity(seed: u64) -> Result<Vec<StatReport>> {
    let mut out = Vec::new();
    for two_n in [2usize, 4, 6, 8] {
        let reps = 1_000_000;
        let tally = try_replicate_fold(
            derive_seed(seed, &format!("duchon/2n={two_n}")),
            reps,
            Tally::new,
            |t, rng| {
                t.record(sample_uniform_bridge(two_n, rng)?.outcome());
                Ok::<(), Error>(())
            },
            Tally::merge,
        )?;
        out.push(chi_square_gof(
            &format!("chi-square flipped walk vs uniform bridges (2n={two_n})"),
            &tally,
            &bridge_law(two_n)?,
        )?);
    }

    let per_input = 100_000;
    let (mut faithful, mut fast, mut between) = (Vec::new(), Vec::new(), Vec::new());
    let mut unchanged = 0u64;
    for two_n in [2usize, 4, 6] {
        for path in all_paths(two_n)? {
            let label = path.to_csv_row();
            if path.is_bridge() {
                // Bridges are left alone by both procedures.
                let mut rng = crate::RngStream::new(derive_seed(seed, &format!("flip-fixed/{label}")), 0);
                unchanged += u64::from(duchon_flip(&path, &mut rng) != path);
                unchanged += u64::from(fast_flip(&path, &mut rng) != path);
                continue;
            }
            let law = flip_law(&path)?;
            let run = |tag: &str, flip: fn(&SignPath, &mut crate::RngStream) -> SignPath| {
                replicate_fold(
                    derive_seed(seed, &format!("flip-{tag}/{label}")),
                    per_input,
                    Tally::new,
                    |t, rng| t.record(flip(&path, rng).outcome()),
                    Tally::merge,
                )
            };
            let a = run("faithful", duchon_flip);
            let b = run("fast", fast_flip);
            faithful.push(chi_square_gof(&label, &a, &law)?);
            fast.push(chi_square_gof(&label, &b, &law)?);
            between.push(chi_square_homogeneity(&label, &a, &b)?);
        }
    }
    out.push(combine_chi_square("pooled chi-square faithful flip vs exact flip law (2n<=6)", &faithful)?);
    out.push(combine_chi_square("pooled chi-square fast flip vs exact flip law (2n<=6)", &fast)?);
    out.push(combine_chi_square("pooled homogeneity faithful vs fast flip (2n<=6)", &between)?);
    out.push(StatReport::violations("flips leave bridges unchanged (2n<=6)", unchanged));
    Ok(out)
}

/// Variance of `B_n(1/2) = S_n / sqrt(2n)` for uniform bridges of length
/// `2n = 10^4`, against the bridge value `1/4`.
pub fn bernoulli_bridge_variance(seed: u64) -> Result<Vec<StatReport>> {
    let two_n = 10_000usize;
    let reps = 100_000;
    let acc = try_replicate_fold(
        derive_seed(seed, "bernoulli-variance"),
        reps,
        || CovAccumulator::new(1),
        |acc, rng| {
            let path = sample_uniform_bridge(two_n, rng)?;
            let half: i64 = path.increments()[..two_n / 2].iter().map(|&d| i64::from(d)).sum();
            acc.push(&[half as f64 / (two_n as f64).sqrt()]);
            Ok::<(), Error>(())
        },
        CovAccumulator::merge,
    )?;
    let var = acc.covariance(0, 0);
    Ok(vec![StatReport::at_most(
        "Bernoulli bridge |var B(1/2) - 1/4| (2n=10^4)",
        (var - 0.25).abs(),
        0.01,
    )
    .with_samples([reps])
    .with_meta("variance", var)])
}

pub fn multinomial_identity() -> Result<Vec<StatReport>> {
    let mut failures = 0u64;
    for s in 0..=4u64 {
        for n in 1..=4usize {
            failures += u64::from(!multinomial_identity_holds(s, n)?);
        }
    }
    Ok(vec![StatReport::violations(
        "sum of s!/prod(alpha_i!) = n^s for s<=4, n<=4",
        failures,
    )
    .with_samples([20])])
}

/// `sup |interpolated - step| <= max N_k / sqrt(n)` on 10^3 samples at each
/// n, with no tolerance.
pub fn interpolation_bound(seed: u64) -> Result<Vec<StatReport>> {
    let mut out = Vec::new();
    for n in [10usize, 100] {
        let reps = 1000;
        let violations = try_replicate_fold(
            derive_seed(seed, &format!("interp/n={n}")),
            reps,
            || 0u64,
            |v, rng| {
                let s = EmpiricalSample::sample(n, rng)?;
                let bound = cell_counts(&s).max() as f64 / (n as f64).sqrt();
                *v += u64::from(interpolation_gap(&s) > bound);
                Ok::<(), Error>(())
            },
            |a, b| a + b,
        )?;
        out.push(
            StatReport::violations(format!("interpolation gap <= max N_k/sqrt(n) (n={n})"), violations)
                .with_samples([reps]),
        );
    }
    Ok(out)
}

/// Frequency of `max N_k >= sqrt(n)` against the bound at `eps = 1`.
pub fn max_cell_tail(seed: u64) -> Result<Vec<StatReport>> {
    let reps = 100_000;
    let mut out = Vec::new();
    for n in [100usize, 1000, 10_000] {
        let level = (n as f64).sqrt();
        let hits = try_replicate_fold(
            derive_seed(seed, &format!("tail/n={n}")),
            reps,
            || 0u64,
            |h, rng| {
                let counts = sample_multinomial_uniform(n as u64, n, rng)?;
                *h += u64::from(counts.max() as f64 >= level);
                Ok::<(), Error>(())
            },
            |a, b| a + b,
        )?;
        let bound = max_cell_tail_bound(n as u64, 1.0)?;
        out.push(
            StatReport::at_most(
                format!("P(max N_k >= sqrt(n)) <= n(1+(e-1)/n)^n e^-sqrt(n) (n={n})"),
                hits as f64 / reps as f64,
                bound,
            )
            .with_samples([reps]),
        );
    }
    Ok(out)
}

/// Covariance of `b_n` at n = 4096 and a two-sample KS test of `sup |b_n|`
/// against the grid maximum of the reference bridge.
pub fn empirical_limit(seed: u64) -> Result<Vec<StatReport>> {
    let n = 4096;
    let reps = 100_000;
    let acc = empirical_covariance(n, &COV_TIMES, reps, seed)?;
    let cov = covariance_check(
        &format!("cov b_n(s), b_n(t) ~ s(1-t) (n={n})"),
        &acc.matrix(),
        |i, j| bridge_covariance(COV_TIMES[i], COV_TIMES[j]),
        0.01,
    )
    .with_samples([reps]);
    debug_assert_eq!(cov.statistic, max_covariance_error(&acc, &COV_TIMES));
    let ks_reps = 10_000;
    let ks = ks_two_sample(
        &format!("KS sup|b_n| (n={n}) vs sup|bridge| (grid {n})"),
        &sup_empirical_samples(n, ks_reps, seed)?,
        &sup_bridge_samples(n, ks_reps, seed)?,
    )?;
    Ok(vec![cov, ks])
}

/// `P(|C_[n/2] + S_n/2| >= 0.5 sqrt(n))` decreases over n in
/// {10^2, 10^3, 10^4} and ends below 0.05.
pub fn correction_decay(seed: u64) -> Result<Vec<StatReport>> {
    Ok(vec![lemma3_decay_study(&[100, 1000, 10_000], 0.5, 0.5, 10_000, seed, 0.05)?.report])
}

/// `cov(S_nt, C_nu)/n ~ -t u` at n = 10^4 within 0.02, reported with the
/// companion walk and bridge covariances.
pub fn joint_covariance(seed: u64) -> Result<Vec<StatReport>> {
    joint_covariance_check(10_000, &COV_TIMES, 100_000, seed, 0.02)
}

/// Ratios of the median of `sup |F_n - F|` across decades of n.
pub fn glivenko_cantelli_rate(seed: u64) -> Result<Vec<StatReport>> {
    let ns = [100usize, 1000, 10_000];
    let medians = ns
        .iter()
        .map(|&n| glivenko_cantelli_median(n, 1000, seed))
        .collect::<Result<Vec<_>>>()?;
    let (lo, hi) = (0.25, 0.40);
    Ok(medians
        .windows(2)
        .zip(ns.windows(2))
        .map(|(m, n)| {
            let ratio = m[1] / m[0];
            // Distance outside [lo, hi]; zero inside.
            let outside = (lo - ratio).max(ratio - hi).max(0.0);
            StatReport::at_most(
                format!("median sup|F_n - F| ratio in [0.25, 0.40] (n={} -> {})", n[0], n[1]),
                outside,
                0.0,
            )
            .with_samples([1000, 1000])
            .with_meta("ratio", ratio)
            .with_meta("medians", format!("{},{}", m[0], m[1]))
        })
        .collect())
}

/// Grid covariances of the reference processes against `min(s,t)` and
/// `s(1-t)`.
pub fn reference_covariances(seed: u64) -> Result<Vec<StatReport>> {
    let m = 1024;
    let reps = 100_000;
    let acc = |label: &str, bridge: bool| {
        try_replicate_fold(
            derive_seed(seed, label),
            reps,
            || CovAccumulator::new(COV_TIMES.len()),
            |acc, rng| {
                let path = if bridge {
                    sample_brownian_bridge(m, rng)?
                } else {
                    sample_brownian_motion(m, rng)?
                };
                let row: Vec<f64> = COV_TIMES.iter().map(|&t| path.value_at(t)).collect();
                acc.push(&row);
                Ok::<(), Error>(())
            },
            CovAccumulator::merge,
        )
    };
    let bm = acc("reference/bm", false)?;
    let br = acc("reference/bridge", true)?;
    Ok(vec![
        covariance_check(
            &format!("Brownian motion cov ~ min(s,t) (grid {m})"),
            &bm.matrix(),
            |i, j| COV_TIMES[i].min(COV_TIMES[j]),
            0.01,
        )
        .with_samples([reps]),
        covariance_check(
            &format!("Brownian bridge cov ~ s(1-t) (grid {m})"),
            &br.matrix(),
            |i, j| bridge_covariance(COV_TIMES[i], COV_TIMES[j]),
            0.01,
        )
        .with_samples([reps]),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        for (s, v) in [
            ("coupling", Suite::Coupling),
            ("duchon", Suite::Duchon),
            ("empirical", Suite::Empirical),
            ("reference", Suite::Reference),
            ("all", Suite::All),
        ] {
            assert_eq!(s.parse::<Suite>().unwrap(), v);
        }
        assert!("bogus".parse::<Suite>().is_err());
        let all = checks(Suite::All).len();
        assert_eq!(all, [Suite::Coupling, Suite::Duchon, Suite::Empirical, Suite::Reference].map(|s| checks(s).len()).iter().sum::<usize>());
    }

    #[test]
    fn cheap_checks_pass() {
        assert!(multinomial_identity().unwrap().iter().all(|r| r.passed));
        assert!(interpolation_bound(REGISTERED_SEED).unwrap().iter().all(|r| r.passed));
    }
}
