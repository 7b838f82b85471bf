use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// How a report's statistic is judged against its threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Passes when the p-value exceeds the threshold (a test level).
    PValueAbove,
    /// Passes when the statistic is strictly below the threshold.
    Below,
    /// Passes when the statistic is at most the threshold.
    AtMost,
}

/// Outcome of one statistical check.
///
/// `passed` is always recomputed from `statistic`/`pvalue` and `threshold`,
/// never set directly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub name: String,
    pub statistic: f64,
    pub pvalue: Option<f64>,
    pub threshold: f64,
    pub verdict: Verdict,
    pub n_samples: Vec<u64>,
    pub passed: bool,
    pub metadata: BTreeMap<String, String>,
}

impl StatReport {
    fn build(
        name: impl Into<String>,
        statistic: f64,
        pvalue: Option<f64>,
        threshold: f64,
        verdict: Verdict,
    ) -> Self {
        let mut r = Self {
            name: name.into(),
            statistic,
            pvalue,
            threshold,
            verdict,
            n_samples: Vec::new(),
            passed: false,
            metadata: BTreeMap::new(),
        };
        r.passed = r.judge();
        r
    }

    pub fn pvalue_test(name: impl Into<String>, statistic: f64, pvalue: f64, level: f64) -> Self {
        Self::build(name, statistic, Some(pvalue), level, Verdict::PValueAbove)
    }

    pub fn below(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self::build(name, statistic, None, threshold, Verdict::Below)
    }

    pub fn at_most(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self::build(name, statistic, None, threshold, Verdict::AtMost)
    }

    /// A check counted in violations: passes iff `violations == 0`.
    pub fn violations(name: impl Into<String>, violations: u64) -> Self {
        Self::at_most(name, violations as f64, 0.0)
    }

    pub fn with_samples(mut self, n_samples: impl IntoIterator<Item = u64>) -> Self {
        self.n_samples = n_samples.into_iter().collect();
        self
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.metadata.insert(key.into(), value.to_string());
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    fn judge(&self) -> bool {
        match self.verdict {
            Verdict::PValueAbove => self.pvalue.is_some_and(|p| p > self.threshold),
            Verdict::Below => self.statistic < self.threshold,
            Verdict::AtMost => self.statistic <= self.threshold,
        }
    }
}

impl fmt::Display for StatReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{status}] {}: statistic={:.6}", self.name, self.statistic)?;
        match (self.verdict, self.pvalue) {
            (Verdict::PValueAbove, Some(p)) => write!(f, " p={p:.4} (> {})", self.threshold),
            (Verdict::Below, _) => write!(f, " (< {})", self.threshold),
            _ => write!(f, " (<= {})", self.threshold),
        }
    }
}
