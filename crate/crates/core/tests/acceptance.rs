//! Acceptance run: every criterion at its stated scale and tolerance, from the
//! registered seed. Prints one line per criterion, then fails if any did.

use donsker::stats::StatReport;
use donsker::suite::{self, REGISTERED_SEED};
use donsker::Result;

type Criterion = (u32, &'static str, fn() -> Result<Vec<StatReport>>);

const CRITERIA: [Criterion; 10] = [
    (1, "coupling exactness, n in {2,3,4}", || suite::coupling_exactness(REGISTERED_SEED)),
    (2, "binomial marginals of C_k given S_n", || suite::binomial_marginals(REGISTERED_SEED)),
    (3, "flip uniformity and faithful/fast equivalence", || suite::duchon_uniformity(REGISTERED_SEED)),
    (4, "multinomial identity, s<=4, n<=4", suite::multinomial_identity),
    (5, "interpolation gap bound, n in {10,100}", || suite::interpolation_bound(REGISTERED_SEED)),
    (6, "max cell tail bound, eps=1", || suite::max_cell_tail(REGISTERED_SEED)),
    (7, "b_n covariance and sup KS at n=4096", || suite::empirical_limit(REGISTERED_SEED)),
    (8, "correction decay over n in {1e2,1e3,1e4}", || suite::correction_decay(REGISTERED_SEED)),
    (9, "joint covariance of S and C at n=1e4", || suite::joint_covariance(REGISTERED_SEED)),
    (10, "Glivenko-Cantelli median ratios", || suite::glivenko_cantelli_rate(REGISTERED_SEED)),
];

fn summary(reports: &[StatReport]) -> String {
    reports
        .iter()
        .map(|r| match r.pvalue {
            Some(p) => format!("{}: p={p:.4}", r.name),
            None => format!("{}: {:.4e} vs {:.4e}", r.name, r.statistic, r.threshold),
        })
        .collect::<Vec<_>>()
        .join("; ")
}

#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    for (id, title, run) in CRITERIA {
        let start = std::time::Instant::now();
        let line = match run() {
            Ok(reports) => {
                let ok = !reports.is_empty() && reports.iter().all(|r| r.passed);
                if !ok {
                    failed.push(id);
                    for r in reports.iter().filter(|r| !r.passed) {
                        eprintln!("  criterion {id} failing check: {r}");
                    }
                }
                format!(
                    "criterion {id:>2} [{}] {title} ({:.1}s) | {}",
                    if ok { "PASS" } else { "FAIL" },
                    start.elapsed().as_secs_f64(),
                    summary(&reports)
                )
            }
            Err(e) => {
                failed.push(id);
                format!("criterion {id:>2} [FAIL] {title}: error: {e}")
            }
        };
        println!("{line}");
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
