use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};

/// Outcome key shared by every discrete law in the crate: count vectors,
/// lattice paths and sign paths are all small integer vectors.
pub type Outcome = Vec<i64>;

/// Largest outcome space the enumerators will build.
pub const MAX_ENUMERATED_OUTCOMES: u128 = 1_000_000;

/// A finite probability law over [`Outcome`]s.
#[derive(Clone, Debug)]
pub struct DiscreteLaw {
    outcomes: Vec<Outcome>,
    probabilities: Vec<f64>,
    index: BTreeMap<Outcome, usize>,
}

fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

impl DiscreteLaw {
    pub fn new(outcomes: Vec<Outcome>, probabilities: Vec<f64>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::EmptyInput("law has no outcomes"));
        }
        if outcomes.len() != probabilities.len() {
            return Err(invalid("outcomes and probabilities differ in length"));
        }
        if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(invalid("probabilities must be finite and non-negative"));
        }
        let total = compensated_sum(probabilities.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("probabilities sum to {total}, not 1")));
        }
        let mut index = BTreeMap::new();
        for (i, o) in outcomes.iter().enumerate() {
            if index.insert(o.clone(), i).is_some() {
                return Err(invalid(format!("duplicate outcome {o:?}")));
            }
        }
        Ok(Self {
            outcomes,
            probabilities,
            index,
        })
    }

    /// Law proportional to exact integer weights.
    pub fn from_weights(outcomes: Vec<Outcome>, weights: &[BigUint]) -> Result<Self> {
        let total: BigUint = weights.iter().sum();
        if total.is_zero() {
            return Err(invalid("weights sum to zero"));
        }
        // Keep both sides within f64 range before dividing.
        let shift = total.bits().saturating_sub(900);
        let denom = (&total >> shift).to_f64().expect("finite after shift");
        let probabilities = weights
            .iter()
            .map(|w| (w >> shift).to_f64().expect("finite after shift") / denom)
            .collect();
        Self::new(outcomes, probabilities)
    }

    pub fn uniform(outcomes: Vec<Outcome>) -> Result<Self> {
        let n = outcomes.len();
        Self::from_weights(outcomes, &vec![BigUint::one(); n])
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn probability(&self, outcome: &[i64]) -> Option<f64> {
        self.index.get(outcome).map(|&i| self.probabilities[i])
    }

    /// Push-forward of the law through `f`, merging outcomes with equal image.
    pub fn map(&self, f: impl Fn(&[i64]) -> Outcome) -> Result<Self> {
        let mut merged: BTreeMap<Outcome, f64> = BTreeMap::new();
        for (o, p) in self.outcomes.iter().zip(&self.probabilities) {
            *merged.entry(f(o)).or_default() += p;
        }
        let (outcomes, probabilities) = merged.into_iter().unzip();
        Self::new(outcomes, probabilities)
    }
}

/// Observed frequencies over outcomes. Merging is associative and
/// commutative, so tallies from concurrent workers can be combined in any
/// order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    counts: BTreeMap<Outcome, u64>,
    total: u64,
}

impl Tally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, outcome: Outcome) {
        self.record_n(outcome, 1);
    }

    pub fn record_n(&mut self, outcome: Outcome, n: u64) {
        *self.counts.entry(outcome).or_default() += n;
        self.total += n;
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        for (o, n) in other.counts {
            self.record_n(o, n);
        }
        self
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn get(&self, outcome: &[i64]) -> u64 {
        self.counts.get(outcome).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Outcome, u64)> {
        self.counts.iter().map(|(o, &n)| (o, n))
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }
}

impl FromIterator<Outcome> for Tally {
    fn from_iter<I: IntoIterator<Item = Outcome>>(iter: I) -> Self {
        let mut t = Tally::new();
        for o in iter {
            t.record(o);
        }
        t
    }
}

/// Total variation distance `(1/2) sum |p_hat - p|` between observed
/// frequencies and a law.
pub fn tv_distance(observed: &Tally, law: &DiscreteLaw) -> Result<f64> {
    if observed.total() == 0 {
        return Err(Error::EmptyInput("tally is empty"));
    }
    if let Some((o, _)) = observed.iter().find(|(o, _)| law.probability(o).is_none()) {
        return Err(Error::Misaligned(format!("observed outcome {o:?} not in law")));
    }
    let n = observed.total() as f64;
    let sum = compensated_sum(
        law.outcomes()
            .iter()
            .zip(law.probabilities())
            .map(|(o, p)| (observed.get(o) as f64 / n - p).abs()),
    );
    Ok(0.5 * sum)
}

fn binomial_u128(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// All compositions of `total` into `parts` non-negative parts, in
/// lexicographic order.
pub fn compositions(total: u64, parts: usize) -> Result<Vec<Vec<u64>>> {
    if parts == 0 {
        return Err(invalid("compositions need at least one part"));
    }
    let count = binomial_u128(u128::from(total) + parts as u128 - 1, parts as u128 - 1);
    match count {
        Some(c) if c <= MAX_ENUMERATED_OUTCOMES => {}
        _ => {
            return Err(Error::TooLarge(format!(
                "compositions of {total} into {parts} parts exceed {MAX_ENUMERATED_OUTCOMES}"
            )))
        }
    }
    let mut out = Vec::new();
    let mut current = vec![0u64; parts];
    fill(total, 0, &mut current, &mut out);
    Ok(out)
}

fn fill(remaining: u64, pos: usize, current: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for x in 0..=remaining {
        current[pos] = x;
        fill(remaining - x, pos + 1, current, out);
    }
}

fn factorials(up_to: u64) -> Vec<BigUint> {
    let mut f = Vec::with_capacity(up_to as usize + 1);
    f.push(BigUint::one());
    for i in 1..=up_to {
        let next = &f[i as usize - 1] * BigUint::from(i);
        f.push(next);
    }
    f
}

/// Exact multinomial coefficients `total! / prod m_i!` for every composition.
pub fn multinomial_coefficients(total: u64, n_cells: usize) -> Result<(Vec<Vec<u64>>, Vec<BigUint>)> {
    let comps = compositions(total, n_cells)?;
    let fact = factorials(total);
    let weights = comps
        .iter()
        .map(|c| {
            let denom: BigUint = c.iter().map(|&m| &fact[m as usize]).product();
            &fact[total as usize] / denom
        })
        .collect();
    Ok((comps, weights))
}

/// Exact law of Mult(total; 1/n, ..., 1/n) over count vectors.
pub fn enumerate_multinomial_law(total: u64, n_cells: usize) -> Result<DiscreteLaw> {
    let (comps, weights) = multinomial_coefficients(total, n_cells)?;
    let outcomes = comps
        .into_iter()
        .map(|c| c.into_iter().map(|m| m as i64).collect())
        .collect();
    DiscreteLaw::from_weights(outcomes, &weights)
}

/// Checks `sum over compositions of s into n parts of s!/prod a_i! == n^s`
/// in exact integer arithmetic.
pub fn multinomial_identity_holds(s: u64, n: usize) -> Result<bool> {
    let (_, weights) = multinomial_coefficients(s, n)?;
    let sum: BigUint = weights.iter().sum();
    let power = BigUint::from(n).pow(u32::try_from(s).map_err(|_| invalid("exponent too large"))?);
    Ok(sum == power)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multinomial_two_two() {
        let law = enumerate_multinomial_law(2, 2).unwrap();
        assert_eq!(law.len(), 3);
        assert_eq!(law.probability(&[2, 0]), Some(0.25));
        assert_eq!(law.probability(&[1, 1]), Some(0.5));
        assert_eq!(law.probability(&[0, 2]), Some(0.25));
    }

    #[test]
    fn exact_weights_sum_to_power() {
        let (comps, w) = multinomial_coefficients(3, 3).unwrap();
        assert_eq!(comps.len(), 10);
        let sum: BigUint = w.iter().sum();
        assert_eq!(sum, BigUint::from(27u32));
    }

    #[test]
    fn identity_for_small_sizes() {
        for s in 0..=4 {
            for n in 1..=4 {
                assert!(multinomial_identity_holds(s, n).unwrap(), "s={s} n={n}");
            }
        }
    }

    #[test]
    fn too_large_state_space() {
        assert!(matches!(
            compositions(100, 100),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn law_validation() {
        assert!(DiscreteLaw::new(vec![vec![0]], vec![0.9]).is_err());
        assert!(DiscreteLaw::new(vec![vec![0], vec![0]], vec![0.5, 0.5]).is_err());
        assert!(DiscreteLaw::new(vec![vec![0]], vec![-1.0]).is_err());
        assert!(DiscreteLaw::new(vec![], vec![]).is_err());
        assert!(DiscreteLaw::new(vec![vec![0], vec![1]], vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn map_merges() {
        let law = enumerate_multinomial_law(2, 2).unwrap();
        let max = law.map(|o| vec![*o.iter().max().unwrap()]).unwrap();
        assert_eq!(max.probability(&[2]), Some(0.5));
        assert_eq!(max.probability(&[1]), Some(0.5));
    }

    #[test]
    fn tv_edges() {
        let law = DiscreteLaw::new(vec![vec![0], vec![1]], vec![1.0, 0.0]).unwrap();
        let exact: Tally = std::iter::repeat_n(vec![0], 10).collect();
        assert_eq!(tv_distance(&exact, &law).unwrap(), 0.0);
        let disjoint: Tally = std::iter::repeat_n(vec![1], 10).collect();
        assert_eq!(tv_distance(&disjoint, &law).unwrap(), 1.0);
        let stray: Tally = std::iter::once(vec![7]).collect();
        assert!(matches!(tv_distance(&stray, &law), Err(Error::Misaligned(_))));
        assert!(tv_distance(&Tally::new(), &law).is_err());
    }

    #[test]
    fn tally_merge_is_order_free() {
        let a: Tally = [vec![1], vec![2], vec![1]].into_iter().collect();
        let b: Tally = [vec![3], vec![1]].into_iter().collect();
        assert_eq!(a.clone().merge(b.clone()), b.merge(a));
    }
}
