//! The correcting process `C`: given a centered Poisson walk `S`, `S + C` has
//! exactly the law of `S` conditioned on `S_n = 0`.
//!
//! Think of `P_i` as balls thrown into urn i. When `S_n = s < 0`, `-s` balls
//! are missing and are thrown uniformly into the n urns; `C_k` counts the new
//! balls in the first k urns. When `s > 0`, `s` of the `n + s` balls are
//! removed uniformly at random and `C_k` is minus the number removed from the
//! first k urns. Either way `C_k` is `Binomial(|s|, k/n)` up to sign, given
//! `S_n = s`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::dist::{sample_multinomial_uniform, sample_multivariate_hypergeometric, CountVector};
use crate::error::{invalid, Error, Result};
use crate::replicate::{replicate_fold, try_replicate_fold};
use crate::rng::{derive_seed, RngStream};
use crate::stats::{
    bridge_covariance, chi_square_gof, covariance_check, CovAccumulator, DiscreteLaw, StatReport,
    Tally,
};
use crate::walk::{rejection_counts, sample_poisson_counts, LatticePath, DEFAULT_REJECTION_CAP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrectionSign {
    /// `S_n < 0`: balls added, `C` nondecreasing.
    Deficit,
    /// `S_n = 0`: no correction.
    Zero,
    /// `S_n > 0`: balls removed, `C` nonincreasing.
    Surplus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionPath {
    values: Vec<i64>,
    sign: CorrectionSign,
}

impl CorrectionPath {
    fn from_increments(increments: impl IntoIterator<Item = i64>, sign: CorrectionSign) -> Self {
        let mut values = vec![0i64];
        let mut c = 0i64;
        for d in increments {
            c += d;
            values.push(c);
        }
        Self { values, sign }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            values: vec![0; n + 1],
            sign: CorrectionSign::Zero,
        }
    }

    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn sign(&self) -> CorrectionSign {
        self.sign
    }

    /// Value at `floor(n t)`.
    pub fn at_time(&self, t: f64) -> i64 {
        let k = ((self.n() as f64 * t).floor() as usize).min(self.n());
        self.values[k]
    }

    pub fn is_monotone_for_sign(&self) -> bool {
        match self.sign {
            CorrectionSign::Zero => self.values.iter().all(|&v| v == 0),
            CorrectionSign::Deficit => self.values.windows(2).all(|w| w[1] >= w[0]),
            CorrectionSign::Surplus => self.values.windows(2).all(|w| w[1] <= w[0]),
        }
    }
}

/// A walk `S`, its correction `C` and the bridge `S + C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoupledTriple {
    pub walk: LatticePath,
    pub correction: CorrectionPath,
    pub bridge: LatticePath,
}

/// JSON shape `{"walk": [..], "correction": [..], "bridge": [..], "sign": ..}`.
#[derive(Serialize)]
struct TripleView<'a> {
    walk: &'a [i64],
    correction: &'a [i64],
    bridge: &'a [i64],
    sign: CorrectionSign,
}

impl Serialize for CoupledTriple {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        TripleView {
            walk: self.walk.values(),
            correction: self.correction.values(),
            bridge: self.bridge.values(),
            sign: self.correction.sign(),
        }
        .serialize(serializer)
    }
}

impl CoupledTriple {
    /// Three aligned columns `t,walk,correction,bridge`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "walk", "correction", "bridge"])?;
        let n = self.walk.n() as f64;
        for k in 0..=self.walk.n() {
            w.write_record([
                (k as f64 / n).to_string(),
                self.walk.values()[k].to_string(),
                self.correction.values()[k].to_string(),
                self.bridge.values()[k].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn excess(counts: &CountVector) -> i64 {
    counts.total() as i64 - counts.len() as i64
}

/// Throws the `-s` missing balls uniformly into the n urns.
pub fn correct_deficit<R: Rng + ?Sized>(
    counts: &CountVector,
    s: i64,
    rng: &mut R,
) -> Result<CorrectionPath> {
    if s >= 0 || excess(counts) != s {
        return Err(invalid(format!(
            "deficit correction needs S_n = {s} < 0, walk has S_n = {}",
            excess(counts)
        )));
    }
    let added = sample_multinomial_uniform(s.unsigned_abs(), counts.len(), rng)?;
    Ok(CorrectionPath::from_increments(
        added.counts().iter().map(|&c| c as i64),
        CorrectionSign::Deficit,
    ))
}

/// Removes `s` of the balls uniformly without replacement:
/// `P(-dC = c | P = p) = prod C(p_i, c_i) / C(sum p, s)`.
pub fn correct_surplus<R: Rng + ?Sized>(
    counts: &CountVector,
    s: i64,
    rng: &mut R,
) -> Result<CorrectionPath> {
    if s <= 0 || excess(counts) != s {
        return Err(invalid(format!(
            "surplus correction needs S_n = {s} > 0, walk has S_n = {}",
            excess(counts)
        )));
    }
    let removed = sample_multivariate_hypergeometric(counts, s as u64, rng)?;
    assert!(
        removed.counts().iter().zip(counts.counts()).all(|(c, p)| c <= p),
        "removed more balls than an urn holds"
    );
    Ok(CorrectionPath::from_increments(
        removed.counts().iter().map(|&c| -(c as i64)),
        CorrectionSign::Surplus,
    ))
}

/// Correction for an arbitrary set of Poisson counts.
pub fn correct<R: Rng + ?Sized>(counts: &CountVector, rng: &mut R) -> Result<CorrectionPath> {
    match excess(counts) {
        0 => Ok(CorrectionPath::zero(counts.len())),
        s if s < 0 => correct_deficit(counts, s, rng),
        s => correct_surplus(counts, s, rng),
    }
}

fn couple<R: Rng + ?Sized>(counts: &CountVector, rng: &mut R) -> Result<CoupledTriple> {
    let walk = LatticePath::from_counts(counts.counts());
    let correction = correct(counts, rng)?;
    let bridge = LatticePath::new(
        walk.values()
            .iter()
            .zip(correction.values())
            .map(|(s, c)| s + c)
            .collect(),
    )?;
    debug_assert_eq!(bridge.last(), 0);
    Ok(CoupledTriple {
        walk,
        correction,
        bridge,
    })
}

/// Draws `S`, corrects it, and returns `(S, C, S + C)`.
pub fn sample_coupled<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CoupledTriple> {
    if n == 0 {
        return Err(invalid("walk length must be at least 1"));
    }
    couple(&sample_poisson_counts(n, rng), rng)
}

/// Coupled triple conditioned on `S_n = s`, by rejection on the walk.
pub fn sample_coupled_given<R: Rng + ?Sized>(
    n: usize,
    s: i64,
    max_attempts: u64,
    rng: &mut R,
) -> Result<CoupledTriple> {
    let (counts, _) = rejection_counts(n, s, max_attempts, rng)?;
    couple(&counts, rng)
}

/// Binomial(m, q) pmf as a law over `[x]`, from log-binomials.
pub fn binomial_law(m: u64, q: f64) -> Result<DiscreteLaw> {
    if !(0.0..=1.0).contains(&q) {
        return Err(invalid(format!("probability {q} outside [0, 1]")));
    }
    let pmf: Vec<f64> = (0..=m).map(|x| binomial_pmf(m, q, x)).collect();
    let total: f64 = pmf.iter().sum();
    DiscreteLaw::new(
        (0..=m).map(|x| vec![x as i64]).collect(),
        pmf.iter().map(|p| p / total).collect(),
    )
}

fn binomial_pmf(m: u64, q: f64, x: u64) -> f64 {
    if q == 0.0 {
        return f64::from(x == 0);
    }
    if q == 1.0 {
        return f64::from(x == m);
    }
    (ln_binomial(m, x) + x as f64 * q.ln() + (m - x) as f64 * (1.0 - q).ln()).exp()
}

/// Checks that, given `S_n = s`, `C_k` is `-sign(s) Binomial(|s|, k/n)`.
///
/// Walks are conditioned by rejection; each conditioned draw may use up to
/// [`DEFAULT_REJECTION_CAP`] attempts.
pub fn marginal_binomial_check(n: usize, k: usize, s: i64, reps: u64, seed: u64) -> Result<StatReport> {
    if k > n {
        return Err(invalid(format!("k = {k} exceeds n = {n}")));
    }
    if s == 0 {
        return Err(invalid("marginal check needs s != 0"));
    }
    let name = format!("C_k | S_n=s ~ Binomial(|s|,k/n) (n={n}, k={k}, s={s})");
    let m = s.unsigned_abs();
    let law = binomial_law(m, k as f64 / n as f64)?;
    let flip = -s.signum();
    let tally = try_replicate_fold(
        derive_seed(seed, &name),
        reps,
        Tally::new,
        |tally, rng| {
            let triple = sample_coupled_given(n, s, DEFAULT_REJECTION_CAP, rng)?;
            // Map C_k to the Binomial variable: C_k for deficits, -C_k for surpluses.
            tally.record(vec![flip * triple.correction.values()[k]]);
            Ok::<(), Error>(())
        },
        Tally::merge,
    )?;
    let report = if law.probabilities().iter().filter(|&&p| p > 0.0).count() == 1 {
        // k = 0 or k = n: a point mass, checked observation by observation.
        let off = tally
            .iter()
            .filter(|(o, _)| law.probability(o).is_none_or(|p| p < 1.0))
            .map(|(_, c)| c)
            .sum();
        StatReport::violations(name, off).with_samples([reps])
    } else {
        chi_square_gof(&name, &tally, &law)?
    };
    Ok(report.with_meta("n", n).with_meta("k", k).with_meta("s", s))
}

/// `P(|Binomial(m, q) - t m| >= threshold)`, summed exactly.
pub fn binomial_deviation_tail(m: u64, q: f64, t: f64, threshold: f64) -> f64 {
    let center = t * m as f64;
    (0..=m)
        .filter(|&x| (x as f64 - center).abs() >= threshold)
        .map(|x| binomial_pmf(m, q, x))
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayRow {
    pub n: usize,
    /// Conditional Monte Carlo estimate of `P(|C_{floor(nt)} + t S_n| >= eps sqrt(n))`:
    /// the average over sampled walks of the exact binomial tail given `S_n`.
    pub estimate: f64,
    pub stderr: f64,
    /// Plain frequency of the event over the sampled coupled triples.
    pub frequency: f64,
}

#[derive(Clone, Debug)]
pub struct DecayStudy {
    pub rows: Vec<DecayRow>,
    pub report: StatReport,
}

#[derive(Clone, Default)]
struct DecayAcc {
    hits: u64,
    sum: f64,
    sum_sq: f64,
    reps: u64,
}

/// Estimates `P(|C_{floor(nt)} + t S_n| >= eps sqrt(n))` along `n_list`.
///
/// Each replication draws a coupled triple. The plain event frequency is
/// recorded, but the headline estimate averages the exact conditional
/// probability given `S_n = s`, which is a binomial tail because `C_k` given
/// `|S_n| = m` is `Binomial(m, floor(nt)/n)` up to sign. That estimator is
/// unbiased and stays positive where the event is far too rare to observe.
///
/// Passes when the estimates strictly decrease (or are all zero) and the last
/// one is below `final_threshold`.
pub fn lemma3_decay_study(
    n_list: &[usize],
    t: f64,
    eps: f64,
    reps: u64,
    seed: u64,
    final_threshold: f64,
) -> Result<DecayStudy> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid(format!("t = {t} outside [0, 1]")));
    }
    if !(eps > 0.0) || reps < 2 || n_list.is_empty() {
        return Err(invalid("decay study needs eps > 0, reps >= 2 and a nonempty n list"));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        if n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        let k = ((n as f64 * t).floor() as usize).min(n);
        let q = k as f64 / n as f64;
        let threshold = eps * (n as f64).sqrt();
        let acc = try_replicate_fold(
            derive_seed(seed, &format!("lemma3/n={n}/t={t}/eps={eps}")),
            reps,
            DecayAcc::default,
            |acc, rng| {
                let triple = sample_coupled(n, rng)?;
                let s = triple.walk.last();
                let c = triple.correction.values()[k];
                acc.hits += u64::from((c as f64 + t * s as f64).abs() >= threshold);
                let p = if s == 0 {
                    0.0
                } else {
                    binomial_deviation_tail(s.unsigned_abs(), q, t, threshold)
                };
                acc.sum += p;
                acc.sum_sq += p * p;
                acc.reps += 1;
                Ok::<(), Error>(())
            },
            |a, b| DecayAcc {
                hits: a.hits + b.hits,
                sum: a.sum + b.sum,
                sum_sq: a.sum_sq + b.sum_sq,
                reps: a.reps + b.reps,
            },
        )?;
        let r = acc.reps as f64;
        let mean = acc.sum / r;
        let var = ((acc.sum_sq - r * mean * mean) / (r - 1.0)).max(0.0);
        rows.push(DecayRow {
            n,
            estimate: mean,
            stderr: (var / r).sqrt(),
            frequency: acc.hits as f64 / r,
        });
    }
    let all_zero = rows.iter().all(|r| r.estimate == 0.0);
    let increases = if all_zero {
        0
    } else {
        rows.windows(2).filter(|w| w[1].estimate >= w[0].estimate).count() as u64
    };
    let last = rows.last().expect("nonempty").estimate;
    let name = format!("P(|C_[nt] + t S_n| >= eps sqrt(n)) decays (t={t}, eps={eps})");
    let fmt = |f: &dyn Fn(&DecayRow) -> f64| {
        rows.iter().map(|r| format!("{:e}", f(r))).collect::<Vec<_>>().join(",")
    };
    let monotone_ok = increases == 0;
    let report = StatReport::below(
        name,
        if monotone_ok { last } else { f64::INFINITY },
        final_threshold,
    )
    .with_samples(rows.iter().map(|_| reps))
    .with_meta("n", n_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","))
    .with_meta("estimates", fmt(&|r| r.estimate))
    .with_meta("stderr", fmt(&|r| r.stderr))
    .with_meta("frequencies", fmt(&|r| r.frequency))
    .with_meta("non_decreasing_steps", increases);
    Ok(DecayStudy { rows, report })
}

/// Joint second moments of `(S_{nt}, C_{nu}, S_{nt} + C_{nt}) / sqrt(n)` over
/// `times`, checked against `cov(B_t, -u B_1) = -t u`, the Brownian
/// covariance `min(s,t)` and the bridge covariance `s(1-t)`.
pub fn joint_covariance_check(
    n: usize,
    times: &[f64],
    reps: u64,
    seed: u64,
    tolerance: f64,
) -> Result<Vec<StatReport>> {
    if n == 0 || times.is_empty() || reps < 2 {
        return Err(invalid("covariance check needs n >= 1, times and reps >= 2"));
    }
    let d = times.len();
    let scale = (n as f64).sqrt();
    let acc = replicate_fold(
        derive_seed(seed, &format!("joint-cov/n={n}")),
        reps,
        || CovAccumulator::new(3 * d),
        |acc, rng: &mut RngStream| {
            let triple = sample_coupled(n, rng).expect("n >= 1");
            let mut row = Vec::with_capacity(3 * d);
            row.extend(times.iter().map(|&t| triple.walk.at_time(t) as f64 / scale));
            row.extend(times.iter().map(|&t| triple.correction.at_time(t) as f64 / scale));
            row.extend(times.iter().map(|&t| triple.bridge.at_time(t) as f64 / scale));
            acc.push(&row);
        },
        CovAccumulator::merge,
    );
    let block = |r0: usize, c0: usize| -> Vec<Vec<f64>> {
        (0..d)
            .map(|i| (0..d).map(|j| acc.covariance(r0 + i, c0 + j)).collect())
            .collect()
    };
    let tag = |r: StatReport| r.with_samples([reps]).with_meta("n", n);
    Ok(vec![
        tag(covariance_check(
            &format!("cov(S_nt, C_nu)/n ~ -t u (n={n})"),
            &block(0, d),
            |i, j| -times[i] * times[j],
            tolerance,
        )),
        tag(covariance_check(
            &format!("cov(S_ns, S_nt)/n ~ min(s,t) (n={n})"),
            &block(0, 0),
            |i, j| times[i].min(times[j]),
            tolerance,
        )),
        tag(covariance_check(
            &format!("cov of (S+C)/sqrt(n) ~ s(1-t) (n={n})"),
            &block(2 * d, 2 * d),
            |i, j| bridge_covariance(times[i], times[j]),
            tolerance,
        )),
    ])
}
