//! Statistical machinery that turns sampled ensembles into pass/fail reports.

mod chi_square;
mod ks;
mod law;
mod moments;
mod modulus;
mod report;

pub use chi_square::{chi_square_gof, chi_square_homogeneity, chi_square_sf, combine_chi_square, MIN_EXPECTED};
pub use ks::{kolmogorov_sf, ks_distance, ks_one_sample, ks_two_sample, normal_cdf};
pub use law::{
    compositions, enumerate_multinomial_law, multinomial_coefficients, multinomial_identity_holds,
    tv_distance, DiscreteLaw, Outcome, Tally, MAX_ENUMERATED_OUTCOMES,
};
pub use moments::{bridge_covariance, covariance_check, covariance_report, CovAccumulator};
pub use modulus::{max_increment, modulus_of_continuity};
pub use report::{StatReport, Verdict};

/// Significance level of every pre-registered hypothesis test.
pub const TEST_LEVEL: f64 = 0.01;
