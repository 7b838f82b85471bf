//! The centered Poisson random walk `S_k = sum_{j<=k} (P_j - 1)` and its
//! bridge, the walk conditioned on `S_n = 0`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{sample_multinomial_uniform, sample_poisson1, CountVector};
use crate::error::{invalid, Error, Result};
use crate::stats::{enumerate_multinomial_law, DiscreteLaw};

/// Attempt cap used by the rejection samplers unless told otherwise.
pub const DEFAULT_REJECTION_CAP: u64 = 10_000_000;

/// Integer path `S_0 = 0, S_1, .., S_n` stored as cumulative values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticePath {
    values: Vec<i64>,
}

impl LatticePath {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid("a lattice path needs n >= 1 steps"));
        }
        if values[0] != 0 {
            return Err(invalid("a lattice path starts at 0"));
        }
        Ok(Self { values })
    }

    /// Partial sums of `counts - 1`.
    pub fn from_counts(counts: &[u64]) -> Self {
        let mut values = Vec::with_capacity(counts.len() + 1);
        let mut s = 0i64;
        values.push(0);
        for &c in counts {
            s += c as i64 - 1;
            values.push(s);
        }
        Self { values }
    }

    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn last(&self) -> i64 {
        self.values[self.n()]
    }

    /// Value at `floor(n t)`.
    pub fn at_time(&self, t: f64) -> i64 {
        let k = ((self.n() as f64 * t).floor() as usize).min(self.n());
        self.values[k]
    }

    pub fn increments(&self) -> impl Iterator<Item = i64> + '_ {
        self.values.windows(2).map(|w| w[1] - w[0])
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "value"])?;
        let n = self.n() as f64;
        for (k, v) in self.values.iter().enumerate() {
            w.write_record([(k as f64 / n).to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// n i.i.d. Poisson(1) counts.
pub fn sample_poisson_counts<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CountVector {
    CountVector::new((0..n).map(|_| sample_poisson1(rng)).collect())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(invalid("walk length must be at least 1"))
    } else {
        Ok(())
    }
}

pub fn sample_walk<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<LatticePath> {
    check_n(n)?;
    Ok(LatticePath::from_counts(sample_poisson_counts(n, rng).counts()))
}

/// The walk conditioned on `S_n = 0`. Given their sum is n, the Poisson
/// counts are Mult(n; 1/n, .., 1/n), so the path is drawn directly.
pub fn sample_conditioned_walk<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<LatticePath> {
    check_n(n)?;
    let counts = sample_multinomial_uniform(n as u64, n, rng)?;
    Ok(LatticePath::from_counts(counts.counts()))
}

/// Poisson counts conditioned on `sum - n == target`, by rejection.
/// Returns the counts and the number of attempts used.
pub fn rejection_counts<R: Rng + ?Sized>(
    n: usize,
    target: i64,
    max_attempts: u64,
    rng: &mut R,
) -> Result<(CountVector, u64)> {
    check_n(n)?;
    for attempt in 1..=max_attempts {
        let counts = sample_poisson_counts(n, rng);
        if counts.total() as i64 - n as i64 == target {
            return Ok((counts, attempt));
        }
    }
    Err(Error::OracleExhausted {
        attempts: max_attempts,
    })
}

/// Brute-force oracle: resample the free walk until it ends at 0.
pub fn rejection_oracle_conditioned_walk<R: Rng + ?Sized>(
    n: usize,
    max_attempts: u64,
    rng: &mut R,
) -> Result<(LatticePath, u64)> {
    let (counts, attempts) = rejection_counts(n, 0, max_attempts, rng)?;
    Ok((LatticePath::from_counts(counts.counts()), attempts))
}

/// Exact law of the conditioned walk on full paths, by enumerating the
/// multinomial outcome space.
pub fn conditioned_walk_law(n: usize) -> Result<DiscreteLaw> {
    check_n(n)?;
    enumerate_multinomial_law(n as u64, n)?.map(|counts| {
        let c: Vec<u64> = counts.iter().map(|&x| x as u64).collect();
        LatticePath::from_counts(&c).values
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::stats::{chi_square_gof, Tally};

    #[test]
    fn from_counts_partial_sums() {
        let p = LatticePath::from_counts(&[0, 3, 1, 0]);
        assert_eq!(p.values(), &[0, -1, 1, 1, 0]);
        assert_eq!(p.n(), 4);
        assert_eq!(p.increments().collect::<Vec<_>>(), vec![-1, 2, 0, -1]);
        assert_eq!(p.at_time(0.5), 1);
        assert_eq!(p.at_time(1.0), 0);
    }

    #[test]
    fn validation() {
        assert!(LatticePath::new(vec![0]).is_err());
        assert!(LatticePath::new(vec![1, 0]).is_err());
        let mut rng = RngStream::new(0, 0);
        assert!(sample_walk(0, &mut rng).is_err());
        assert!(sample_conditioned_walk(0, &mut rng).is_err());
    }

    #[test]
    fn increments_at_least_minus_one() {
        let mut rng = RngStream::new(4, 0);
        for _ in 0..100 {
            let p = sample_walk(200, &mut rng).unwrap();
            assert!(p.increments().all(|d| d >= -1));
        }
    }

    #[test]
    fn conditioned_ends_at_zero() {
        let mut rng = RngStream::new(4, 1);
        for n in 1..50 {
            assert_eq!(sample_conditioned_walk(n, &mut rng).unwrap().last(), 0);
            let (p, _) = rejection_oracle_conditioned_walk(n.min(6), 1_000_000, &mut rng).unwrap();
            assert_eq!(p.last(), 0);
        }
    }

    #[test]
    fn exact_law_n2() {
        let law = conditioned_walk_law(2).unwrap();
        assert_eq!(law.len(), 3);
        assert_eq!(law.probability(&[0, 1, 0]), Some(0.25));
        assert_eq!(law.probability(&[0, 0, 0]), Some(0.5));
        assert_eq!(law.probability(&[0, -1, 0]), Some(0.25));
    }

    #[test]
    fn conditioned_n2_first_step() {
        let mut rng = RngStream::new(21, 0);
        let tally: Tally = (0..1_000_000)
            .map(|_| sample_conditioned_walk(2, &mut rng).unwrap().values().to_vec())
            .collect();
        let r = chi_square_gof("cond n=2", &tally, &conditioned_walk_law(2).unwrap()).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn oracle_exhaustion() {
        let mut rng = RngStream::new(1, 0);
        // S_1 = 5 needs P_1 = 6, probability ~5e-4: one attempt almost never suffices
        // and the error path is what we want to see.
        let err = (0..20)
            .map(|_| rejection_counts(1, 5, 1, &mut rng))
            .find(|r| r.is_err())
            .unwrap();
        assert!(matches!(err, Err(Error::OracleExhausted { attempts: 1 })));
    }

    #[test]
    fn csv_shape() {
        let p = LatticePath::from_counts(&[2, 0]);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,value\n0,0\n0.5,1\n1,0\n");
    }
}
