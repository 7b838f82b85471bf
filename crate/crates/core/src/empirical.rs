//! The uniform empirical process `b_n(t) = sqrt(n) (F_n(t) - t)`, both as a
//! step function of the sorted sample and through the cell counts of the
//! regular partition of [0, 1] into n cells.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::sample_uniform01;
use crate::error::{invalid, Result};
use crate::grid::GridFunction;

/// n points of [0, 1], kept sorted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSample {
    points: Vec<f64>,
}

/// Occupancy of the n cells `[(j-1)/n, j/n)`, the last one closed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCounts {
    counts: Vec<u64>,
}

#[inline]
fn cell_of(u: f64, n: usize) -> usize {
    ((u * n as f64) as usize).min(n - 1)
}

impl EmpiricalSample {
    pub fn from_points(mut points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("an empirical sample needs at least one point"));
        }
        if let Some(bad) = points.iter().find(|u| !(0.0..=1.0).contains(*u)) {
            return Err(invalid(format!("sample point {bad} outside [0, 1]")));
        }
        points.sort_unstable_by(f64::total_cmp);
        Ok(Self { points })
    }

    /// Draws n i.i.d. uniforms and sorts them by bucketing into the n cells,
    /// which takes expected O(n) time.
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(invalid("an empirical sample needs at least one point"));
        }
        let raw: Vec<f64> = (0..n).map(|_| sample_uniform01(rng)).collect();
        let mut offsets = vec![0usize; n + 1];
        for &u in &raw {
            offsets[cell_of(u, n) + 1] += 1;
        }
        for j in 1..=n {
            offsets[j] += offsets[j - 1];
        }
        let mut points = vec![0.0; n];
        let mut next = offsets.clone();
        for &u in &raw {
            let c = cell_of(u, n);
            points[next[c]] = u;
            next[c] += 1;
        }
        for j in 0..n {
            let bucket = &mut points[offsets[j]..offsets[j + 1]];
            if bucket.len() > 1 {
                bucket.sort_unstable_by(f64::total_cmp);
            }
        }
        Ok(Self { points })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }
}

impl CellCounts {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        let n = counts.len() as u64;
        if n == 0 {
            return Err(invalid("cell counts need at least one cell"));
        }
        let total: u64 = counts.iter().sum();
        if total != n {
            return Err(invalid(format!("cell counts sum to {total}, expected {n}")));
        }
        Ok(Self { counts })
    }

    pub fn n(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn max(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }
}

fn check_t(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(invalid(format!("time {t} outside [0, 1]")))
    }
}

/// Number of sample points `<= t`.
fn count_at_most(sample: &EmpiricalSample, t: f64) -> usize {
    sample.points.partition_point(|&u| u <= t)
}

/// `F_n(t) = #{U_i <= t} / n`.
pub fn empirical_cdf(sample: &EmpiricalSample, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(count_at_most(sample, t) as f64 / sample.n() as f64)
}

/// `b_n(t) = sqrt(n) (F_n(t) - t)`.
pub fn empirical_process(sample: &EmpiricalSample, t: f64) -> Result<f64> {
    check_t(t)?;
    let n = sample.n() as f64;
    // n F_n(t) - n t first, one division at the end.
    Ok((count_at_most(sample, t) as f64 - n * t) / n.sqrt())
}

pub fn cell_counts(sample: &EmpiricalSample) -> CellCounts {
    let n = sample.n();
    let mut counts = vec![0u64; n];
    for &u in &sample.points {
        counts[cell_of(u, n)] += 1;
    }
    CellCounts { counts }
}

/// The empirical process at the nodes `k/n` from cell counts:
/// `n^{-1/2} sum_{j<=k} (N_j - 1)`, linearly interpolated in between.
pub fn grid_process_from_counts(counts: &CellCounts) -> GridFunction {
    let n = counts.n();
    let scale = (n as f64).sqrt();
    let mut partial = 0i64;
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    for &c in &counts.counts {
        partial += c as i64 - 1;
        values.push(partial as f64 / scale);
    }
    GridFunction::new(values).expect("n >= 1 gives two nodes")
}

/// Exact `sup_t |bbar_n(t) - b_n(t)|`, where `bbar_n` interpolates `b_n`
/// linearly between the nodes `k/n`.
///
/// Inside cell k with `N` points at relative offsets `x_1 <= .. <= x_N` the
/// difference is `n^{-1/2} (x N - #{points at offset <= x})`, so the sup is
/// reached at a jump (left or right limit); the cell endpoints contribute 0.
pub fn interpolation_gap(sample: &EmpiricalSample) -> f64 {
    let n = sample.n();
    let nf = n as f64;
    let mut worst = 0.0f64;
    let pts = &sample.points;
    let mut i = 0;
    while i < pts.len() {
        let cell = cell_of(pts[i], n);
        let mut end = i;
        while end < pts.len() && cell_of(pts[end], n) == cell {
            end += 1;
        }
        let count = (end - i) as f64;
        for (rank, &u) in pts[i..end].iter().enumerate() {
            let x = (u * nf - cell as f64).clamp(0.0, 1.0);
            let line = x * count;
            let right = (line - (rank + 1) as f64).abs();
            let left = (line - rank as f64).abs();
            worst = worst.max(right).max(left);
        }
        i = end;
    }
    worst / nf.sqrt()
}

/// `sup_t |F_n(t) - t|`, from the left and right limits at each jump.
pub fn glivenko_cantelli_stat(sample: &EmpiricalSample) -> f64 {
    let n = sample.n() as f64;
    sample
        .points
        .iter()
        .enumerate()
        .fold(0.0f64, |acc, (i, &u)| {
            acc.max((i as f64 + 1.0) / n - u).max(u - i as f64 / n)
        })
}

/// `sup_t |b_n(t)|`.
pub fn sup_abs_process(sample: &EmpiricalSample) -> f64 {
    (sample.n() as f64).sqrt() * glivenko_cantelli_stat(sample)
}

/// Markov-inequality bound on `P(max_k N_k >= eps sqrt(n))`:
/// `n (1 + (e-1)/n)^n e^{-eps sqrt(n)}`.
pub fn max_cell_tail_bound(n: u64, eps: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    if !(eps > 0.0) {
        return Err(invalid("eps must be positive"));
    }
    let nf = n as f64;
    let log = nf.ln() + nf * ((std::f64::consts::E - 1.0) / nf).ln_1p() - eps * nf.sqrt();
    Ok(log.exp())
}
