use statrs::function::gamma::gamma_ur;

use super::law::{DiscreteLaw, Tally};
use super::report::StatReport;
use super::TEST_LEVEL;
use crate::error::{Error, Result};

/// Smallest expected count a chi-square bin may carry after merging.
pub const MIN_EXPECTED: f64 = 5.0;

/// Upper tail of the chi-square distribution with `df` degrees of freedom,
/// via the regularized upper incomplete gamma function.
pub fn chi_square_sf(statistic: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    if statistic <= 0.0 {
        return 1.0;
    }
    if !statistic.is_finite() {
        return 0.0;
    }
    gamma_ur(df as f64 / 2.0, statistic / 2.0)
}

#[derive(Clone, Copy, Debug)]
struct Bin {
    expected: f64,
    observed: f64,
    // second row for homogeneity tests
    expected_b: f64,
    observed_b: f64,
}

impl Bin {
    fn weight(&self) -> f64 {
        if self.expected_b > 0.0 {
            self.expected.min(self.expected_b)
        } else {
            self.expected
        }
    }

    fn absorb(&mut self, other: Bin) {
        self.expected += other.expected;
        self.observed += other.observed;
        self.expected_b += other.expected_b;
        self.observed_b += other.observed_b;
    }
}

/// Greedily merges the two bins with the smallest expected counts until all
/// reach [`MIN_EXPECTED`]. Ties resolve to the lower position, so the
/// result depends only on the input order.
fn merge_small_bins(mut bins: Vec<Bin>) -> Vec<Bin> {
    while bins.len() > 1 {
        let mut order: Vec<usize> = (0..bins.len()).collect();
        order.sort_by(|&i, &j| bins[i].weight().total_cmp(&bins[j].weight()).then(i.cmp(&j)));
        if bins[order[0]].weight() >= MIN_EXPECTED {
            break;
        }
        let (keep, drop) = (order[0].min(order[1]), order[0].max(order[1]));
        let removed = bins.remove(drop);
        bins[keep].absorb(removed);
    }
    bins
}

fn pearson(bins: &[Bin]) -> f64 {
    bins.iter()
        .map(|b| {
            let mut s = (b.observed - b.expected).powi(2) / b.expected;
            if b.expected_b > 0.0 {
                s += (b.observed_b - b.expected_b).powi(2) / b.expected_b;
            }
            s
        })
        .sum()
}

/// Pearson goodness-of-fit of observed frequencies against an exact law.
///
/// Observations on outcomes the law excludes make the test fail outright
/// (infinite statistic, p = 0).
pub fn chi_square_gof(name: &str, observed: &Tally, law: &DiscreteLaw) -> Result<StatReport> {
    let n = observed.total();
    if n == 0 {
        return Err(Error::EmptyInput("no observations"));
    }
    let unexpected: u64 = observed
        .iter()
        .filter(|(o, _)| law.probability(o).is_none_or(|p| p == 0.0))
        .map(|(_, c)| c)
        .sum();
    if unexpected > 0 {
        return Ok(
            StatReport::pvalue_test(name, f64::INFINITY, 0.0, TEST_LEVEL)
                .with_samples([n])
                .with_meta("unexpected_observations", unexpected),
        );
    }
    let bins: Vec<Bin> = law
        .outcomes()
        .iter()
        .zip(law.probabilities())
        .filter(|(_, &p)| p > 0.0)
        .map(|(o, &p)| Bin {
            expected: p * n as f64,
            observed: observed.get(o) as f64,
            expected_b: 0.0,
            observed_b: 0.0,
        })
        .collect();
    let bins = merge_small_bins(bins);
    if bins.len() < 2 {
        return Err(Error::Degenerate("a single bin remains after merging".into()));
    }
    let statistic = pearson(&bins);
    let df = bins.len() - 1;
    Ok(
        StatReport::pvalue_test(name, statistic, chi_square_sf(statistic, df), TEST_LEVEL)
            .with_samples([n])
            .with_meta("df", df),
    )
}

/// Two-sample chi-square test of homogeneity: do `a` and `b` come from the
/// same law?
pub fn chi_square_homogeneity(name: &str, a: &Tally, b: &Tally) -> Result<StatReport> {
    let (na, nb) = (a.total() as f64, b.total() as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::EmptyInput("both samples need observations"));
    }
    let mut keys: Vec<&Vec<i64>> = a.iter().map(|(o, _)| o).collect();
    keys.extend(b.iter().map(|(o, _)| o));
    keys.sort();
    keys.dedup();
    let total = na + nb;
    let bins: Vec<Bin> = keys
        .iter()
        .map(|o| {
            let (oa, ob) = (a.get(o) as f64, b.get(o) as f64);
            let pooled = (oa + ob) / total;
            Bin {
                expected: pooled * na,
                observed: oa,
                expected_b: pooled * nb,
                observed_b: ob,
            }
        })
        .collect();
    let bins = merge_small_bins(bins);
    if bins.len() < 2 {
        return Err(Error::Degenerate("a single bin remains after merging".into()));
    }
    let statistic = pearson(&bins);
    let df = bins.len() - 1;
    Ok(
        StatReport::pvalue_test(name, statistic, chi_square_sf(statistic, df), TEST_LEVEL)
            .with_samples([a.total(), b.total()])
            .with_meta("df", df),
    )
}

/// Pools independent chi-square tests into one: the statistics and degrees
/// of freedom add.
pub fn combine_chi_square(name: &str, reports: &[StatReport]) -> Result<StatReport> {
    let mut statistic = 0.0;
    let mut df = 0usize;
    let mut samples = 0u64;
    for r in reports {
        let d: usize = r
            .metadata
            .get("df")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::InvalidArgument(format!("report {} has no df", r.name)))?;
        statistic += r.statistic;
        df += d;
        samples += r.n_samples.iter().sum::<u64>();
    }
    Ok(
        StatReport::pvalue_test(name, statistic, chi_square_sf(statistic, df), TEST_LEVEL)
            .with_samples([samples])
            .with_meta("df", df)
            .with_meta("components", reports.len()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law3() -> DiscreteLaw {
        DiscreteLaw::new(vec![vec![0], vec![1], vec![2]], vec![0.25, 0.5, 0.25]).unwrap()
    }

    #[test]
    fn sf_reference_values() {
        // chi2(1) tail at 3.841458820694124 is 0.05; chi2(10) at 23.209251158954356 is 0.01.
        assert!((chi_square_sf(3.841_458_820_694_124, 1) - 0.05).abs() < 1e-10);
        assert!((chi_square_sf(23.209_251_158_954_356, 10) - 0.01).abs() < 1e-10);
        assert_eq!(chi_square_sf(0.0, 4), 1.0);
    }

    #[test]
    fn proportional_observation_gives_zero() {
        let mut t = Tally::new();
        t.record_n(vec![0], 250);
        t.record_n(vec![1], 500);
        t.record_n(vec![2], 250);
        let r = chi_square_gof("exact", &t, &law3()).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.pvalue, Some(1.0));
        assert!(r.passed);
    }

    #[test]
    fn impossible_outcome_fails() {
        let mut t = Tally::new();
        t.record_n(vec![0], 250);
        t.record_n(vec![9], 1);
        let r = chi_square_gof("stray", &t, &law3()).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn single_bin_is_degenerate() {
        let law = DiscreteLaw::new(vec![vec![0]], vec![1.0]).unwrap();
        let t: Tally = std::iter::repeat_n(vec![0], 10).collect();
        assert!(matches!(chi_square_gof("d", &t, &law), Err(Error::Degenerate(_))));
        // Tiny samples merge everything into one bin as well.
        let t: Tally = std::iter::repeat_n(vec![1], 3).collect();
        assert!(matches!(chi_square_gof("d", &t, &law3()), Err(Error::Degenerate(_))));
    }

    #[test]
    fn small_bins_merge_deterministically() {
        let bins = vec![
            Bin { expected: 1.0, observed: 1.0, expected_b: 0.0, observed_b: 0.0 },
            Bin { expected: 50.0, observed: 50.0, expected_b: 0.0, observed_b: 0.0 },
            Bin { expected: 2.0, observed: 3.0, expected_b: 0.0, observed_b: 0.0 },
            Bin { expected: 3.0, observed: 2.0, expected_b: 0.0, observed_b: 0.0 },
        ];
        let merged = merge_small_bins(bins);
        assert_eq!(merged.len(), 2);
        assert_eq!(merged[0].expected, 6.0);
        assert_eq!(merged[1].expected, 50.0);
    }

    #[test]
    fn homogeneity_identical_tallies() {
        let mut t = Tally::new();
        t.record_n(vec![0], 300);
        t.record_n(vec![1], 700);
        let r = chi_square_homogeneity("same", &t, &t.clone()).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.passed);
    }

    #[test]
    fn combined_degrees_of_freedom_add() {
        let a = StatReport::pvalue_test("a", 2.0, 0.3, 0.01).with_meta("df", 2);
        let b = StatReport::pvalue_test("b", 3.0, 0.4, 0.01).with_meta("df", 3);
        let c = combine_chi_square("ab", &[a, b]).unwrap();
        assert_eq!(c.statistic, 5.0);
        assert_eq!(c.metadata["df"], "5");
        assert!((c.pvalue.unwrap() - chi_square_sf(5.0, 5)).abs() < 1e-15);
    }
}
