use std::collections::VecDeque;

use crate::error::{invalid, Result};
use crate::grid::GridFunction;

/// Global modulus of continuity `sup |f(x) - f(y)|` over grid nodes with
/// `|x - y| <= delta`.
///
/// When `delta * m` is an integer this equals the modulus of the
/// piecewise-linear interpolant over all of `[0,1]`: the extremes of
/// `f(x) - f(y)` on `|x - y| <= delta` sit at node pairs.
pub fn modulus_of_continuity(f: &GridFunction, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid(format!("delta {delta} outside (0, 1]")));
    }
    let m = f.m();
    // Nodes at most `width` steps apart; the epsilon absorbs delta*m rounding.
    let width = ((delta * m as f64) + 1e-9).floor() as usize;
    if width == 0 {
        return Ok(0.0);
    }
    let v = f.values();
    let mut best = 0.0f64;
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    for (j, &x) in v.iter().enumerate() {
        while maxq.back().is_some_and(|&k| v[k] <= x) {
            maxq.pop_back();
        }
        maxq.push_back(j);
        while minq.back().is_some_and(|&k| v[k] >= x) {
            minq.pop_back();
        }
        minq.push_back(j);
        let lo = j.saturating_sub(width);
        while maxq.front().is_some_and(|&k| k < lo) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&k| k < lo) {
            minq.pop_front();
        }
        best = best.max(v[maxq[0]] - v[minq[0]]);
    }
    Ok(best)
}

/// `max_k |f(k/m) - f((k-1)/m)|`.
pub fn max_increment(f: &GridFunction) -> f64 {
    f.values()
        .windows(2)
        .fold(0.0, |acc, w| acc.max((w[1] - w[0]).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(f: &GridFunction, delta: f64) -> f64 {
        let m = f.m();
        let v = f.values();
        let mut best = 0.0f64;
        for i in 0..=m {
            for j in i..=m {
                if (j - i) as f64 / m as f64 <= delta + 1e-12 {
                    best = best.max((v[j] - v[i]).abs());
                }
            }
        }
        best
    }

    #[test]
    fn linear_function() {
        let f = GridFunction::from_fn(100, |t| t).unwrap();
        assert!((modulus_of_continuity(&f, 0.1).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn constant_function() {
        let f = GridFunction::from_fn(50, |_| 3.0).unwrap();
        assert_eq!(modulus_of_continuity(&f, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_delta() {
        let f = GridFunction::from_fn(5, |t| t).unwrap();
        assert!(modulus_of_continuity(&f, 0.0).is_err());
        assert!(modulus_of_continuity(&f, 1.5).is_err());
    }

    proptest! {
        #[test]
        fn matches_brute_force(values in proptest::collection::vec(-5.0f64..5.0, 2..40), delta in 0.01f64..=1.0) {
            let f = GridFunction::new(values).unwrap();
            let fast = modulus_of_continuity(&f, delta).unwrap();
            prop_assert!((fast - brute(&f, delta)).abs() < 1e-12);
        }

        #[test]
        fn monotone_in_delta(values in proptest::collection::vec(-5.0f64..5.0, 2..40), a in 0.01f64..=1.0, b in 0.01f64..=1.0) {
            let f = GridFunction::new(values).unwrap();
            let (lo, hi) = (a.min(b), a.max(b));
            prop_assert!(modulus_of_continuity(&f, lo).unwrap() <= modulus_of_continuity(&f, hi).unwrap());
        }

        #[test]
        fn monotone_paths_obey_two_increment_bound(steps in proptest::collection::vec(0.0f64..3.0, 1..60)) {
            // omega_{1/m}(f) <= 2 max_k |f(k/m) - f((k-1)/m)| for nondecreasing f.
            let mut acc = 0.0;
            let mut values = vec![0.0];
            for s in steps {
                acc += s;
                values.push(acc);
            }
            let f = GridFunction::new(values).unwrap();
            let omega = modulus_of_continuity(&f, 1.0 / f.m() as f64).unwrap();
            prop_assert!(omega <= 2.0 * max_increment(&f));
        }
    }
}
