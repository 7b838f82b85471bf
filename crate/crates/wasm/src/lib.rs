//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export takes a size and a seed and returns a JSON string, so the page
//! needs no generated TypeScript types.

use donsker::bernoulli::{duchon_flip, sample_simple_walk};
use donsker::coupling::sample_coupled;
use donsker::empirical::{empirical_process, sup_abs_process, EmpiricalSample};
use donsker::reference::{continuous_sup_abs, sample_brownian_bridge};
use donsker::{GridFunction, RngStream};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest size accepted from the page; keeps a click under a frame or two.
pub const MAX_SIZE: u32 = 1 << 16;

fn check_size(n: u32) -> donsker::Result<usize> {
    if n == 0 || n > MAX_SIZE {
        return Err(donsker::Error::InvalidArgument(format!("size must be in 1..={MAX_SIZE}")));
    }
    Ok(n as usize)
}

fn to_js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

pub fn coupled_json(n: u32, seed: u32) -> donsker::Result<String> {
    let n = check_size(n)?;
    let triple = sample_coupled(n, &mut RngStream::new(u64::from(seed), 0))?;
    Ok(serde_json::to_string(&triple)?)
}

#[derive(Serialize)]
struct EmpiricalView {
    empirical: GridFunction,
    bridge: GridFunction,
    sup_empirical: f64,
    sup_bridge: f64,
}

/// Grid used for drawing; the sups are computed exactly regardless.
const DRAW_GRID: usize = 512;

pub fn empirical_json(n: u32, seed: u32) -> donsker::Result<String> {
    let n = check_size(n)?;
    let mut rng = RngStream::new(u64::from(seed), 1);
    let sample = EmpiricalSample::sample(n, &mut rng)?;
    let m = DRAW_GRID.min(4 * n).max(1);
    let values = (0..=m)
        .map(|k| empirical_process(&sample, k as f64 / m as f64))
        .collect::<donsker::Result<Vec<_>>>()?;
    let bridge = sample_brownian_bridge(DRAW_GRID, &mut rng)?;
    let view = EmpiricalView {
        empirical: GridFunction::new(values)?,
        sup_empirical: sup_abs_process(&sample),
        sup_bridge: continuous_sup_abs(&bridge, &mut rng),
        bridge,
    };
    Ok(serde_json::to_string(&view)?)
}

#[derive(Serialize)]
struct FlipView {
    walk: Vec<i64>,
    bridge: Vec<i64>,
    flipped: Vec<usize>,
}

pub fn flip_json(two_n: u32, seed: u32) -> donsker::Result<String> {
    let two_n = check_size(two_n)?;
    let mut rng = RngStream::new(u64::from(seed), 2);
    let walk = sample_simple_walk(two_n, &mut rng)?;
    let bridge = duchon_flip(&walk, &mut rng);
    let flipped = (0..two_n)
        .filter(|&i| walk.increments()[i] != bridge.increments()[i])
        .collect();
    let view = FlipView {
        walk: walk.positions(),
        bridge: bridge.positions(),
        flipped,
    };
    Ok(serde_json::to_string(&view)?)
}

/// `{"walk", "correction", "bridge", "sign"}` for a walk of length `n`.
#[wasm_bindgen]
pub fn coupled_paths(n: u32, seed: u32) -> Result<String, JsError> {
    coupled_json(n, seed).map_err(to_js)
}

/// `{"empirical", "bridge", "sup_empirical", "sup_bridge"}`: one `b_n` and
/// one reference bridge, both as `{"m", "values"}` grids.
#[wasm_bindgen]
pub fn empirical_vs_bridge(n: u32, seed: u32) -> Result<String, JsError> {
    empirical_json(n, seed).map_err(to_js)
}

/// `{"walk", "bridge", "flipped"}`: positions of a simple walk of even length
/// `two_n`, of its flipped bridge, and the flipped step indices.
#[wasm_bindgen]
pub fn flipped_walk(two_n: u32, seed: u32) -> Result<String, JsError> {
    flip_json(two_n, seed).map_err(to_js)
}
