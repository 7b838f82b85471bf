//! Replication driver.
//!
//! Replication `i` always draws from `RngStream::new(seed, i)`. Work is cut
//! into fixed chunks whose partial results are merged in chunk order, so the
//! output is identical for any number of worker threads.

use crate::rng::RngStream;

const CHUNK: u64 = 1024;

fn chunks(reps: u64) -> impl Iterator<Item = (u64, u64)> + Clone {
    (0..reps.div_ceil(CHUNK)).map(move |c| (c * CHUNK, ((c + 1) * CHUNK).min(reps)))
}

/// Runs `f` once per replication and returns the results in replication
/// order.
pub fn replicate<T, F>(seed: u64, reps: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut RngStream) -> T + Sync,
{
    let run = |(lo, hi): (u64, u64)| -> Vec<T> {
        (lo..hi).map(|i| f(&mut RngStream::new(seed, i))).collect()
    };
    map_chunks(reps, run).into_iter().flatten().collect()
}

/// Folds replications into an accumulator. `merge` must be associative; it is
/// applied left to right over chunk results.
pub fn replicate_fold<A, I, S, M>(seed: u64, reps: u64, init: I, step: S, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, &mut RngStream) + Sync,
    M: Fn(A, A) -> A,
{
    let run = |(lo, hi): (u64, u64)| -> A {
        let mut acc = init();
        for i in lo..hi {
            step(&mut acc, &mut RngStream::new(seed, i));
        }
        acc
    };
    map_chunks(reps, run).into_iter().fold(init(), merge)
}

/// Like [`replicate_fold`] for fallible steps; the first error in
/// replication order is returned.
pub fn try_replicate_fold<A, E, I, S, M>(
    seed: u64,
    reps: u64,
    init: I,
    step: S,
    merge: M,
) -> Result<A, E>
where
    A: Send,
    E: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, &mut RngStream) -> Result<(), E> + Sync,
    M: Fn(A, A) -> A,
{
    let run = |(lo, hi): (u64, u64)| -> Result<A, E> {
        let mut acc = init();
        for i in lo..hi {
            step(&mut acc, &mut RngStream::new(seed, i))?;
        }
        Ok(acc)
    };
    map_chunks(reps, run)
        .into_iter()
        .try_fold(init(), |acc, part| part.map(|p| merge(acc, p)))
}

#[cfg(feature = "parallel")]
fn map_chunks<T: Send>(reps: u64, run: impl Fn((u64, u64)) -> T + Sync) -> Vec<T> {
    use rayon::prelude::*;
    let bounds: Vec<(u64, u64)> = chunks(reps).collect();
    bounds.into_par_iter().map(&run).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_chunks<T: Send>(reps: u64, run: impl Fn((u64, u64)) -> T + Sync) -> Vec<T> {
    chunks(reps).map(run).collect()
}
