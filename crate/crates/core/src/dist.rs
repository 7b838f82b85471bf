//! Exact samplers for the base distributions: uniform, Poisson(1), binomial,
//! uniform multinomial and multivariate hypergeometric.

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Occupancy counts of a row of cells.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountVector {
    counts: Vec<u64>,
    total: u64,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        Self { counts, total }
    }

    pub fn zeros(n_cells: usize) -> Self {
        Self {
            counts: vec![0; n_cells],
            total: 0,
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn max(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn into_counts(self) -> Vec<u64> {
        self.counts
    }
}

/// Uniform on [0, 1) with 53 bits of resolution.
#[inline]
pub fn sample_uniform01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

const INV_E: f64 = 0.367_879_441_171_442_33;

/// Poisson(1) by sequential inversion of the CDF.
///
/// The expected number of loop iterations is 1 + mean = 2.
#[inline]
pub fn sample_poisson1<R: Rng + ?Sized>(rng: &mut R) -> u64 {
    let u = sample_uniform01(rng);
    let mut k = 0u64;
    let mut pmf = INV_E;
    let mut cdf = pmf;
    // Past k = 25 the remaining mass is below f64 resolution.
    while u >= cdf && k < 25 {
        k += 1;
        pmf /= k as f64;
        cdf += pmf;
    }
    k
}

/// Mean below which binomials are drawn by inversion rather than BTPE.
const INVERSION_MEAN_LIMIT: f64 = 30.0;

/// Exact Binomial(k, p) draw.
pub fn sample_binomial<R: Rng + ?Sized>(k: u64, p: f64, rng: &mut R) -> Result<u64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("binomial probability {p} outside [0, 1]")));
    }
    Ok(binomial_unchecked(k, p, rng))
}

pub(crate) fn binomial_unchecked<R: Rng + ?Sized>(k: u64, p: f64, rng: &mut R) -> u64 {
    if k == 0 || p == 0.0 {
        return 0;
    }
    if p == 1.0 {
        return k;
    }
    let flipped = p > 0.5;
    let q = if flipped { 1.0 - p } else { p };
    let x = if (k as f64) * q < INVERSION_MEAN_LIMIT {
        binomial_inversion(k, q, rng)
    } else {
        rand_distr::Binomial::new(k, q)
            .expect("q in (0, 0.5]")
            .sample(rng)
    };
    if flipped {
        k - x
    } else {
        x
    }
}

/// Walks the pmf from 0 upward. Requires q <= 1/2 and k*q small so that the
/// starting mass (1-q)^k stays far from underflow.
fn binomial_inversion<R: Rng + ?Sized>(k: u64, q: f64, rng: &mut R) -> u64 {
    let ratio = q / (1.0 - q);
    let mut pmf = (1.0 - q).powf(k as f64);
    let mut u = sample_uniform01(rng);
    let mut x = 0u64;
    while u >= pmf {
        u -= pmf;
        x += 1;
        if x >= k {
            return k;
        }
        pmf *= ratio * (k - x + 1) as f64 / x as f64;
    }
    x
}

/// Multinomial(total; 1/n_cells, ..., 1/n_cells).
///
/// For `total <= n_cells` every ball is thrown into a uniformly chosen cell;
/// otherwise cells are filled by chained conditional binomials, cell `i`
/// receiving Binomial(remaining, 1/(n_cells - i)). Both routes give the exact
/// law and cost O(max(total, n_cells)).
pub fn sample_multinomial_uniform<R: Rng + ?Sized>(
    total: u64,
    n_cells: usize,
    rng: &mut R,
) -> Result<CountVector> {
    if n_cells == 0 {
        return Err(invalid("multinomial needs at least one cell"));
    }
    let mut counts = vec![0u64; n_cells];
    if total <= n_cells as u64 {
        for _ in 0..total {
            counts[rng.random_range(0..n_cells)] += 1;
        }
    } else {
        let mut remaining = total;
        for (i, slot) in counts.iter_mut().enumerate().take(n_cells - 1) {
            if remaining == 0 {
                break;
            }
            let x = binomial_unchecked(remaining, 1.0 / (n_cells - i) as f64, rng);
            *slot = x;
            remaining -= x;
        }
        counts[n_cells - 1] += remaining;
    }
    Ok(CountVector { counts, total })
}

/// Removes `draw` balls uniformly without replacement from urns holding
/// `urns.counts()[i]` balls each, and returns how many left each urn.
///
/// Equivalently: the multivariate hypergeometric law
/// P(c) = prod_i C(p_i, c_i) / C(sum p, draw).
pub fn sample_multivariate_hypergeometric<R: Rng + ?Sized>(
    urns: &CountVector,
    draw: u64,
    rng: &mut R,
) -> Result<CountVector> {
    let total = urns.total;
    if draw > total {
        return Err(invalid(format!(
            "cannot draw {draw} balls from urns holding {total}"
        )));
    }
    if draw == 0 {
        return Ok(CountVector::zeros(urns.len()));
    }
    if draw == total {
        return Ok(urns.clone());
    }
    // Selecting the kept balls is cheaper when most balls are drawn.
    if draw > total / 2 {
        let kept = select_balls(urns, total - draw, rng);
        let counts = urns
            .counts
            .iter()
            .zip(kept)
            .map(|(&p, k)| p - k)
            .collect();
        return Ok(CountVector {
            counts,
            total: draw,
        });
    }
    Ok(CountVector {
        counts: select_balls(urns, draw, rng),
        total: draw,
    })
}

fn select_balls<R: Rng + ?Sized>(urns: &CountVector, draw: u64, rng: &mut R) -> Vec<u64> {
    let total = urns.total;
    let mut picked = vec![0u64; urns.len()];
    if draw.saturating_mul(8) < total {
        // Sparse: a uniform subset of ball labels, then one pass over the urns.
        let mut labels = rand::seq::index::sample(rng, total as usize, draw as usize).into_vec();
        labels.sort_unstable();
        let mut next = labels.into_iter().peekable();
        let mut upper = 0u64;
        for (slot, &p) in picked.iter_mut().zip(&urns.counts) {
            upper += p;
            while next.next_if(|&l| (l as u64) < upper).is_some() {
                *slot += 1;
            }
        }
    } else {
        // Dense: sequential selection, each ball kept with probability
        // needed / remaining, which is the ball-level conditional law.
        let mut needed = draw;
        let mut remaining = total;
        'urns: for (slot, &p) in picked.iter_mut().zip(&urns.counts) {
            for _ in 0..p {
                if needed == 0 {
                    break 'urns;
                }
                if (rng.random_range(0..remaining)) < needed {
                    *slot += 1;
                    needed -= 1;
                }
                remaining -= 1;
            }
        }
    }
    picked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use crate::stats::{chi_square_gof, DiscreteLaw, Tally};

    fn binomial_pmf(k: u64, p: f64) -> Vec<f64> {
        // Independent oracle: direct C(k, x) p^x (1-p)^(k-x).
        (0..=k)
            .map(|x| {
                let mut c = 1.0;
                for i in 0..x {
                    c *= (k - i) as f64 / (i + 1) as f64;
                }
                c * p.powi(x as i32) * (1.0 - p).powi((k - x) as i32)
            })
            .collect()
    }

    fn scalar_law(pmf: &[f64]) -> DiscreteLaw {
        DiscreteLaw::new(
            (0..pmf.len()).map(|x| vec![x as i64]).collect(),
            pmf.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn uniform_mean_and_ks() {
        let mut rng = RngStream::new(42, 0);
        let xs: Vec<f64> = (0..1_000_000).map(|_| sample_uniform01(&mut rng)).collect();
        assert!(xs.iter().all(|&x| (0.0..1.0).contains(&x)));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 0.5).abs() < 0.002, "mean {mean}");
        let report = crate::stats::ks_one_sample("uniform", &xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!(report.statistic < 1.63 / 1000.0, "{report:?}");
    }

    #[test]
    fn poisson1_moments_and_gof() {
        let mut rng = RngStream::new(11, 0);
        let mut tally = Tally::new();
        let mut zeros = 0u64;
        let mut sum = 0u64;
        let reps = 1_000_000u64;
        for _ in 0..reps {
            let x = sample_poisson1(&mut rng);
            zeros += u64::from(x == 0);
            sum += x;
            tally.record(vec![x.min(4) as i64]);
        }
        let p0 = zeros as f64 / reps as f64;
        assert!((p0 - (-1.0f64).exp()).abs() < 0.002, "p0 {p0}");
        assert!((sum as f64 / reps as f64 - 1.0).abs() < 0.004);

        // Bins {0,1,2,3,>=4} from e^-1/k!.
        let e = (-1.0f64).exp();
        let pmf = [e, e, e / 2.0, e / 6.0, 1.0 - e * (1.0 + 1.0 + 0.5 + 1.0 / 6.0)];
        let report = chi_square_gof("poisson1", &tally, &scalar_law(&pmf)).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn binomial_degenerate_cases() {
        let mut rng = RngStream::new(1, 0);
        assert_eq!(sample_binomial(0, 0.3, &mut rng).unwrap(), 0);
        assert_eq!(sample_binomial(17, 0.0, &mut rng).unwrap(), 0);
        assert_eq!(sample_binomial(17, 1.0, &mut rng).unwrap(), 17);
        assert!(sample_binomial(3, 1.5, &mut rng).is_err());
        assert!(sample_binomial(3, -0.1, &mut rng).is_err());
        assert!(sample_binomial(3, f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn binomial_two_half_gof() {
        let mut rng = RngStream::new(2, 0);
        let mut tally = Tally::new();
        for _ in 0..1_000_000 {
            tally.record(vec![sample_binomial(2, 0.5, &mut rng).unwrap() as i64]);
        }
        let report = chi_square_gof("bin(2,.5)", &tally, &scalar_law(&[0.25, 0.5, 0.25])).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn binomial_both_branches_gof() {
        // (k, p) pairs exercising inversion, the p > 1/2 reflection and BTPE.
        for (i, &(k, p)) in [(10u64, 0.3), (10, 0.8), (200, 0.4)].iter().enumerate() {
            let mut rng = RngStream::new(3, i as u64);
            let mut tally = Tally::new();
            for _ in 0..200_000 {
                tally.record(vec![sample_binomial(k, p, &mut rng).unwrap() as i64]);
            }
            let report =
                chi_square_gof("binomial", &tally, &scalar_law(&binomial_pmf(k, p))).unwrap();
            assert!(report.passed, "k={k} p={p}: {report:?}");
        }
    }

    #[test]
    fn multinomial_small_cases() {
        let mut rng = RngStream::new(5, 0);
        let zero = sample_multinomial_uniform(0, 4, &mut rng).unwrap();
        assert_eq!(zero.counts(), &[0, 0, 0, 0]);
        assert!(sample_multinomial_uniform(3, 0, &mut rng).is_err());

        let mut tally = Tally::new();
        for _ in 0..1_000_000 {
            let c = sample_multinomial_uniform(2, 2, &mut rng).unwrap();
            tally.record(c.counts().iter().map(|&x| x as i64).collect());
        }
        let law = DiscreteLaw::new(
            vec![vec![0, 2], vec![1, 1], vec![2, 0]],
            vec![0.25, 0.5, 0.25],
        )
        .unwrap();
        let report = chi_square_gof("mult(2;2)", &tally, &law).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn multinomial_three_by_three_matches_formula() {
        // s!/prod(m_i!) * n^-s over the 10 compositions of 3 into 3 parts.
        let mut outcomes = Vec::new();
        let mut probs = Vec::new();
        let fact = [1.0, 1.0, 2.0, 6.0];
        for a in 0..=3i64 {
            for b in 0..=(3 - a) {
                let c = 3 - a - b;
                outcomes.push(vec![a, b, c]);
                probs.push(6.0 / (fact[a as usize] * fact[b as usize] * fact[c as usize]) / 27.0);
            }
        }
        assert_eq!(outcomes.len(), 10);
        let law = DiscreteLaw::new(outcomes, probs).unwrap();
        let mut rng = RngStream::new(6, 0);
        let mut tally = Tally::new();
        for _ in 0..1_000_000 {
            let c = sample_multinomial_uniform(3, 3, &mut rng).unwrap();
            tally.record(c.counts().iter().map(|&x| x as i64).collect());
        }
        let report = chi_square_gof("mult(3;3)", &tally, &law).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn multinomial_binomial_chain_branch() {
        // total > n_cells takes the chained-binomial route; marginal of the
        // first cell is Binomial(total, 1/n).
        let mut rng = RngStream::new(8, 0);
        let mut tally = Tally::new();
        for _ in 0..200_000 {
            let c = sample_multinomial_uniform(9, 3, &mut rng).unwrap();
            assert_eq!(c.counts().iter().sum::<u64>(), 9);
            tally.record(vec![c.counts()[2] as i64]);
        }
        let law = scalar_law(&binomial_pmf(9, 1.0 / 3.0));
        let report = chi_square_gof("mult(9;3) last cell", &tally, &law).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn hypergeometric_two_one_draw_one() {
        // prod C(p_i, c_i) / C(3, 1): (1,0) -> 2/3, (0,1) -> 1/3.
        let urns = CountVector::new(vec![2, 1]);
        let mut rng = RngStream::new(9, 0);
        let mut tally = Tally::new();
        for _ in 0..300_000 {
            let c = sample_multivariate_hypergeometric(&urns, 1, &mut rng).unwrap();
            tally.record(c.counts().iter().map(|&x| x as i64).collect());
        }
        let law = DiscreteLaw::new(vec![vec![0, 1], vec![1, 0]], vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let report = chi_square_gof("mvh", &tally, &law).unwrap();
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn hypergeometric_edges() {
        let urns = CountVector::new(vec![3, 0, 2]);
        let mut rng = RngStream::new(10, 0);
        assert_eq!(
            sample_multivariate_hypergeometric(&urns, 0, &mut rng).unwrap().counts(),
            &[0, 0, 0]
        );
        assert_eq!(
            sample_multivariate_hypergeometric(&urns, 5, &mut rng).unwrap(),
            urns
        );
        assert!(sample_multivariate_hypergeometric(&urns, 6, &mut rng).is_err());
    }

    #[test]
    fn hypergeometric_sparse_and_dense_routes_agree_with_pmf() {
        // urns (3,1,4), draw 2 (dense) and urns of 40 balls, draw 2 (sparse).
        for (urns, draw) in [(vec![3u64, 1, 4], 2u64), (vec![10, 20, 10], 2)] {
            let urns = CountVector::new(urns);
            let total = urns.total();
            let mut outcomes = Vec::new();
            let mut probs = Vec::new();
            let choose = |n: u64, k: u64| -> f64 {
                if k > n {
                    return 0.0;
                }
                (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
            };
            for a in 0..=draw {
                for b in 0..=(draw - a) {
                    let c = draw - a - b;
                    let p = choose(urns.counts()[0], a)
                        * choose(urns.counts()[1], b)
                        * choose(urns.counts()[2], c)
                        / choose(total, draw);
                    if p > 0.0 {
                        outcomes.push(vec![a as i64, b as i64, c as i64]);
                        probs.push(p);
                    }
                }
            }
            let law = DiscreteLaw::new(outcomes, probs).unwrap();
            let mut rng = RngStream::new(12, total);
            let mut tally = Tally::new();
            for _ in 0..200_000 {
                let c = sample_multivariate_hypergeometric(&urns, draw, &mut rng).unwrap();
                tally.record(c.counts().iter().map(|&x| x as i64).collect());
            }
            let report = chi_square_gof("mvh", &tally, &law).unwrap();
            assert!(report.passed, "{urns:?}: {report:?}");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn hypergeometric_respects_urns(
                urns in proptest::collection::vec(0u64..6, 1..12),
                frac in 0.0f64..=1.0,
                seed in any::<u64>(),
            ) {
                let urns = CountVector::new(urns);
                let draw = (urns.total() as f64 * frac).floor() as u64;
                let mut rng = RngStream::new(seed, 0);
                let c = sample_multivariate_hypergeometric(&urns, draw, &mut rng).unwrap();
                prop_assert_eq!(c.total(), draw);
                prop_assert_eq!(c.counts().iter().sum::<u64>(), draw);
                for (ci, pi) in c.counts().iter().zip(urns.counts()) {
                    prop_assert!(ci <= pi);
                }
            }

            #[test]
            fn multinomial_sums_to_total(total in 0u64..200, cells in 1usize..50, seed in any::<u64>()) {
                let mut rng = RngStream::new(seed, 1);
                let c = sample_multinomial_uniform(total, cells, &mut rng).unwrap();
                prop_assert_eq!(c.len(), cells);
                prop_assert_eq!(c.counts().iter().sum::<u64>(), total);
                prop_assert_eq!(c.total(), total);
            }

            #[test]
            fn binomial_in_range(k in 0u64..5000, p in 0.0f64..=1.0, seed in any::<u64>()) {
                let mut rng = RngStream::new(seed, 2);
                prop_assert!(sample_binomial(k, p, &mut rng).unwrap() <= k);
            }
        }
    }

    #[test]
    fn determinism_across_calls() {
        let run = || {
            let mut rng = RngStream::new(99, 5);
            (0..100)
                .map(|_| sample_poisson1(&mut rng) + sample_binomial(50, 0.2, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }
}
