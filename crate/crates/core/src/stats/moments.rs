use super::report::StatReport;
use crate::grid::GridFunction;

/// Streaming first and second moments of a fixed-width real vector.
///
/// Accumulators from separate workers combine with [`CovAccumulator::merge`];
/// the replication driver merges them in a fixed order so results do not
/// depend on scheduling.
#[derive(Clone, Debug, PartialEq)]
pub struct CovAccumulator {
    dim: usize,
    n: u64,
    sums: Vec<f64>,
    cross: Vec<f64>,
}

impl CovAccumulator {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            n: 0,
            sums: vec![0.0; dim],
            cross: vec![0.0; dim * dim],
        }
    }

    pub fn push(&mut self, x: &[f64]) {
        assert_eq!(x.len(), self.dim, "observation width");
        self.n += 1;
        for i in 0..self.dim {
            self.sums[i] += x[i];
            for j in i..self.dim {
                self.cross[i * self.dim + j] += x[i] * x[j];
            }
        }
    }

    pub fn merge(mut self, other: CovAccumulator) -> CovAccumulator {
        assert_eq!(self.dim, other.dim);
        self.n += other.n;
        self.sums.iter_mut().zip(&other.sums).for_each(|(a, b)| *a += b);
        self.cross.iter_mut().zip(&other.cross).for_each(|(a, b)| *a += b);
        self
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.sums[i] / self.n as f64
    }

    /// Unbiased covariance estimate of coordinates `i` and `j`.
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        let (i, j) = (i.min(j), i.max(j));
        let n = self.n as f64;
        (self.cross[i * self.dim + j] - self.sums[i] * self.sums[j] / n) / (n - 1.0)
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.covariance(i, j)).collect())
            .collect()
    }
}

/// `cov(b(s), b(t)) = min(s,t) (1 - max(s,t))` for the Brownian bridge.
pub fn bridge_covariance(s: f64, t: f64) -> f64 {
    s.min(t) * (1.0 - s.max(t))
}

/// Compares an empirical covariance matrix entrywise to a target, passing
/// when the largest absolute error is at most `tolerance`.
pub fn covariance_check(
    name: &str,
    matrix: &[Vec<f64>],
    target: impl Fn(usize, usize) -> f64,
    tolerance: f64,
) -> StatReport {
    let mut worst = 0.0f64;
    let mut cells = Vec::new();
    for (i, row) in matrix.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let expected = target(i, j);
            worst = worst.max((v - expected).abs());
            cells.push(format!("{v:.5}/{expected:.5}"));
        }
    }
    StatReport::at_most(name, worst, tolerance).with_meta("observed/expected", cells.join(" "))
}

/// Empirical covariance of an ensemble of paths at the given times, checked
/// against the Brownian bridge covariance.
pub fn covariance_report(
    name: &str,
    paths: &[GridFunction],
    times: &[f64],
    tolerance: f64,
) -> (Vec<Vec<f64>>, StatReport) {
    let mut acc = CovAccumulator::new(times.len());
    let mut row = vec![0.0; times.len()];
    for p in paths {
        for (slot, &t) in row.iter_mut().zip(times) {
            *slot = p.value_at(t);
        }
        acc.push(&row);
    }
    let matrix = acc.matrix();
    let report = covariance_check(name, &matrix, |i, j| bridge_covariance(times[i], times[j]), tolerance)
        .with_samples([paths.len() as u64]);
    (matrix, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_ensemble_zero_matrix() {
        let paths = vec![GridFunction::from_fn(4, |_| 0.0).unwrap(); 10];
        let (m, _) = covariance_report("zero", &paths, &[0.25, 0.5, 0.75], 1.0);
        assert!(m.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn known_covariance() {
        let mut acc = CovAccumulator::new(2);
        for (x, y) in [(1.0, 2.0), (2.0, 4.0), (3.0, 6.0)] {
            acc.push(&[x, y]);
        }
        assert_eq!(acc.covariance(0, 0), 1.0);
        assert_eq!(acc.covariance(0, 1), 2.0);
        assert_eq!(acc.covariance(1, 0), 2.0);
        assert_eq!(acc.covariance(1, 1), 4.0);
    }

    #[test]
    fn merge_matches_single_pass() {
        let data: Vec<[f64; 2]> = (0..20).map(|i| [i as f64, (i * i) as f64 * 0.5]).collect();
        let mut whole = CovAccumulator::new(2);
        data.iter().for_each(|x| whole.push(x));
        let mut a = CovAccumulator::new(2);
        let mut b = CovAccumulator::new(2);
        data[..7].iter().for_each(|x| a.push(x));
        data[7..].iter().for_each(|x| b.push(x));
        let merged = a.merge(b);
        assert_eq!(merged.count(), 20);
        assert!((merged.covariance(0, 1) - whole.covariance(0, 1)).abs() < 1e-9);
    }

    #[test]
    fn bridge_cov_values() {
        assert_eq!(bridge_covariance(0.25, 0.75), 0.0625);
        assert_eq!(bridge_covariance(0.75, 0.25), 0.0625);
        assert_eq!(bridge_covariance(0.5, 0.5), 0.25);
    }
}
