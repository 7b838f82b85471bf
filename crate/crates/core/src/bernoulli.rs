//! Uniform Bernoulli bridges by flipping surplus steps of a simple walk.
//!
//! Draw 2n i.i.d. ±1 steps. If they sum to `2k > 0`, draw indices uniformly
//! with replacement and turn each `+1` hit into `-1` until k steps have been
//! changed; `-1` hits are ignored. The result is uniform over the
//! `C(2n, n)` bridges. A negative sum is handled by the mirror procedure.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::stats::{DiscreteLaw, Outcome, MAX_ENUMERATED_OUTCOMES};

/// A ±1 path of even length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct SignPath {
    increments: Vec<i8>,
}

impl TryFrom<Vec<i8>> for SignPath {
    type Error = crate::Error;

    fn try_from(increments: Vec<i8>) -> Result<Self> {
        SignPath::new(increments)
    }
}

impl From<SignPath> for Vec<i8> {
    fn from(p: SignPath) -> Self {
        p.increments
    }
}

fn check_length(two_n: usize) -> Result<()> {
    if two_n < 2 || !two_n.is_multiple_of(2) {
        Err(invalid(format!("sign path length {two_n} must be even and >= 2")))
    } else {
        Ok(())
    }
}

impl SignPath {
    pub fn new(increments: Vec<i8>) -> Result<Self> {
        check_length(increments.len())?;
        if increments.iter().any(|&d| d != 1 && d != -1) {
            return Err(invalid("sign path entries must be +1 or -1"));
        }
        Ok(Self { increments })
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    pub fn increments(&self) -> &[i8] {
        &self.increments
    }

    pub fn sum(&self) -> i64 {
        self.increments.iter().map(|&d| i64::from(d)).sum()
    }

    pub fn is_bridge(&self) -> bool {
        self.sum() == 0
    }

    /// Walk positions `S_0 = 0, .., S_{2n}`.
    pub fn positions(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut s = 0i64;
        out.push(0);
        for &d in &self.increments {
            s += i64::from(d);
            out.push(s);
        }
        out
    }

    pub fn outcome(&self) -> Outcome {
        self.increments.iter().map(|&d| i64::from(d)).collect()
    }

    /// A single CSV row of ±1 values.
    pub fn to_csv_row(&self) -> String {
        self.increments
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

pub fn sample_simple_walk<R: Rng + ?Sized>(two_n: usize, rng: &mut R) -> Result<SignPath> {
    check_length(two_n)?;
    let mut increments = Vec::with_capacity(two_n);
    while increments.len() < two_n {
        let mut bits = rng.next_u64();
        for _ in 0..(two_n - increments.len()).min(64) {
            increments.push(if bits & 1 == 1 { 1 } else { -1 });
            bits >>= 1;
        }
    }
    Ok(SignPath { increments })
}

/// Sign of the steps to flip and how many: `(+1, k)` when the sum is `2k > 0`.
fn surplus(path: &SignPath) -> (i8, usize) {
    let s = path.sum();
    let target = if s > 0 { 1 } else { -1 };
    (target, (s.unsigned_abs() / 2) as usize)
}

/// The flip procedure with indices drawn with replacement.
pub fn duchon_flip<R: Rng + ?Sized>(path: &SignPath, rng: &mut R) -> SignPath {
    let mut out = path.clone();
    let (target, mut k) = surplus(path);
    let len = out.len();
    while k > 0 {
        let i = rng.random_range(0..len);
        if out.increments[i] == target {
            out.increments[i] = -target;
            k -= 1;
        }
    }
    out
}

/// Same law as [`duchon_flip`]: the set of surplus steps first hit by the
/// index draws is a uniform k-subset, so it is drawn directly.
pub fn fast_flip<R: Rng + ?Sized>(path: &SignPath, rng: &mut R) -> SignPath {
    let mut out = path.clone();
    let (target, k) = surplus(path);
    if k == 0 {
        return out;
    }
    let candidates: Vec<usize> = (0..out.len())
        .filter(|&i| out.increments[i] == target)
        .collect();
    for pick in rand::seq::index::sample(rng, candidates.len(), k) {
        out.increments[candidates[pick]] = -target;
    }
    out
}

pub fn sample_uniform_bridge<R: Rng + ?Sized>(two_n: usize, rng: &mut R) -> Result<SignPath> {
    let walk = sample_simple_walk(two_n, rng)?;
    Ok(duchon_flip(&walk, rng))
}

fn n_choose_k(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Uniform law on the `C(2n, n)` Bernoulli bridges.
pub fn bridge_law(two_n: usize) -> Result<DiscreteLaw> {
    check_length(two_n)?;
    if n_choose_k(two_n, two_n / 2) > MAX_ENUMERATED_OUTCOMES {
        return Err(crate::Error::TooLarge(format!("bridges of length {two_n}")));
    }
    let outcomes = subsets(two_n, two_n / 2)
        .into_iter()
        .map(|ups| {
            let mut path = vec![-1i64; two_n];
            ups.into_iter().for_each(|i| path[i] = 1);
            path
        })
        .collect();
    DiscreteLaw::uniform(outcomes)
}

/// Exact output law of the flip for a fixed input: each k-subset of the
/// surplus steps is flipped with equal probability.
pub fn flip_law(path: &SignPath) -> Result<DiscreteLaw> {
    let (target, k) = surplus(path);
    let candidates: Vec<usize> = (0..path.len())
        .filter(|&i| path.increments[i] == target)
        .collect();
    if n_choose_k(candidates.len(), k) > MAX_ENUMERATED_OUTCOMES {
        return Err(crate::Error::TooLarge("flip law".into()));
    }
    let outcomes = subsets(candidates.len(), k)
        .into_iter()
        .map(|chosen| {
            let mut out = path.outcome();
            chosen.into_iter().for_each(|c| out[candidates[c]] = -i64::from(target));
            out
        })
        .collect();
    DiscreteLaw::uniform(outcomes)
}

/// Every ±1 path of the given length.
pub fn all_paths(two_n: usize) -> Result<Vec<SignPath>> {
    check_length(two_n)?;
    if two_n > 20 {
        return Err(crate::Error::TooLarge(format!("all paths of length {two_n}")));
    }
    Ok((0u32..1 << two_n)
        .map(|bits| SignPath {
            increments: (0..two_n)
                .map(|i| if bits >> i & 1 == 1 { 1 } else { -1 })
                .collect(),
        })
        .collect())
}
