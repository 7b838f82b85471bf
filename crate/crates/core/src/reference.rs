//! Gaussian reference processes on a grid: Brownian motion and the Brownian
//! bridge `b(t) = B_t - t B_1`.
//!
//! Normal increments come from `rand_distr::StandardNormal` (a ziggurat
//! sampler over uniform draws), scaled by `1/sqrt(m)`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::grid::GridFunction;

/// Grid path of a Gaussian process, `values[0] = 0`.
pub type GaussianGridPath = GridFunction;

pub fn sample_brownian_motion<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<GaussianGridPath> {
    if m == 0 {
        return Err(invalid("grid size must be at least 1"));
    }
    let step = (1.0 / m as f64).sqrt();
    let mut values = Vec::with_capacity(m + 1);
    let mut b = 0.0;
    values.push(b);
    for _ in 0..m {
        let z: f64 = StandardNormal.sample(rng);
        b += step * z;
        values.push(b);
    }
    GridFunction::new(values)
}

/// Bridge from one Brownian path; the endpoint is exactly 0.
pub fn sample_brownian_bridge<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<GaussianGridPath> {
    let bm = sample_brownian_motion(m, rng)?;
    let end = bm.values()[m];
    let values = bm
        .values()
        .iter()
        .enumerate()
        .map(|(k, &b)| if k == m { 0.0 } else { b - (k as f64 / m as f64) * end })
        .collect();
    GridFunction::new(values)
}

/// Samples `sup |b|` over `[0, 1]` for a Brownian motion or bridge given its
/// grid values.
///
/// Conditionally on the grid, each cell is an independent Brownian bridge
/// with variance `h = 1/m` between its endpoints `a` and `c`, whose maximum
/// is `(a + c + sqrt((c - a)^2 - 2 h ln U)) / 2`. The cell maxima of `b` and
/// of `-b` are drawn separately, which ignores their dependence; that only
/// matters if the path spans both `+x` and `-x` inside one cell for `x` near
/// the overall sup, an event of probability about `exp(-2 x^2 m)`.
pub fn continuous_sup_abs<R: Rng + ?Sized>(path: &GaussianGridPath, rng: &mut R) -> f64 {
    let h = 1.0 / path.m() as f64;
    let cell_max = |a: f64, c: f64, rng: &mut R| {
        // 1 - U lies in (0, 1], so the log is finite.
        let u = 1.0 - rng.random::<f64>();
        0.5 * (a + c + ((c - a) * (c - a) - 2.0 * h * u.ln()).sqrt())
    };
    path.values().windows(2).fold(0.0f64, |acc, w| {
        let up = cell_max(w[0], w[1], rng);
        let down = cell_max(-w[0], -w[1], rng);
        acc.max(up).max(down)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn endpoints() {
        let mut rng = RngStream::new(1, 0);
        for m in [1, 2, 8, 1000] {
            let b = sample_brownian_motion(m, &mut rng).unwrap();
            assert_eq!(b.values()[0], 0.0);
            assert_eq!(b.m(), m);
            let br = sample_brownian_bridge(m, &mut rng).unwrap();
            assert_eq!(br.values()[0], 0.0);
            assert_eq!(br.values()[m], 0.0);
        }
        assert!(sample_brownian_motion(0, &mut rng).is_err());
        assert!(sample_brownian_bridge(0, &mut rng).is_err());
    }

    #[test]
    fn continuous_sup_dominates_grid_sup() {
        let mut rng = RngStream::new(2, 0);
        for m in [1, 4, 64] {
            let b = sample_brownian_bridge(m, &mut rng).unwrap();
            assert!(continuous_sup_abs(&b, &mut rng) >= b.sup_abs());
        }
    }

    #[test]
    fn single_cell_max_law() {
        // For a standard bridge pinned at 0 on [0, 1], P(max > x) = exp(-2 x^2).
        let flat = GridFunction::new(vec![0.0, 0.0]).unwrap();
        let mut rng = RngStream::new(3, 0);
        let n = 200_000;
        let x = 0.5;
        // |b| exceeds x if either side does; the two one-sided tails are
        // drawn independently here, so the rate is 1 - (1 - e^{-2x^2})^2.
        let hits = (0..n)
            .filter(|_| continuous_sup_abs(&flat, &mut rng) > x)
            .count() as f64
            / n as f64;
        let p1 = (-2.0 * x * x).exp();
        let expected = 1.0 - (1.0 - p1) * (1.0 - p1);
        assert!((hits - expected).abs() < 5.0 * (expected * (1.0 - expected) / n as f64).sqrt());
    }
}
