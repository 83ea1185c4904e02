//! Browser bindings: phase portraits of `p_n` and of the limit field, and the
//! exact second-moment curve `n -> E|p_n(z)|^2`.
//!
//! The `*_impl` functions carry the logic and are plain Rust so they can be
//! tested natively; the exported wrappers only convert errors.

use ewens_charpoly::limit_field::LimitSampler;
use ewens_charpoly::portrait::{self, PhasePortrait};
use ewens_charpoly::series::second_moment_limit;
use ewens_charpoly::{sample_cycle_type, series, stats, Complex64, ThetaSequence};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest size the page lets a user request.
pub const MAX_N: usize = 100_000;
pub const MAX_GRID: usize = 1024;

fn family(text: &str) -> Result<ThetaSequence, String> {
    text.parse().map_err(|e: ewens_charpoly::Error| e.to_string())
}

fn check_grid(grid: usize) -> Result<(), String> {
    if (portrait::MIN_GRID..=MAX_GRID).contains(&grid) {
        Ok(())
    } else {
        Err(format!("grid must lie in {}..={MAX_GRID}", portrait::MIN_GRID))
    }
}

pub fn charpoly_portrait_impl(text: &str, n: usize, seed: u64, grid: usize) -> Result<Vec<u8>, String> {
    check_grid(grid)?;
    if n == 0 || n > MAX_N {
        return Err(format!("n must lie in 1..={MAX_N}"));
    }
    let ct = sample_cycle_type(&family(text)?, n, seed)
        .map_err(|e| e.to_string())?
        .cycle_type;
    Ok(PhasePortrait::of_factors(&ct.factors(), grid)
        .map_err(|e| e.to_string())?
        .rgba())
}

pub fn limit_portrait_impl(text: &str, seed: u64, grid: usize) -> Result<Vec<u8>, String> {
    check_grid(grid)?;
    let sampler = LimitSampler::new(&family(text)?, portrait::EXTENT, stats::LIMIT_EPS).map_err(|e| e.to_string())?;
    let sample = sampler.sample_with(&mut ewens_charpoly::ensemble::replica_rng(seed, 0), seed);
    Ok(PhasePortrait::of_factors(&sample.factors(), grid)
        .map_err(|e| e.to_string())?
        .rgba())
}

pub fn second_moment_curve_impl(text: &str, re: f64, im: f64, n_max: usize) -> Result<String, String> {
    if n_max == 0 || n_max > 5000 {
        return Err("n_max must lie in 1..=5000".into());
    }
    let seq = family(text)?;
    let z = Complex64::new(re, im);
    let limit = second_moment_limit(&seq, z).map_err(|e| e.to_string())?;
    let values = series::second_moment_curve(&seq, z, n_max).map_err(|e| e.to_string())?[1..].to_vec();
    Ok(json!({ "family": seq.to_string(), "z": [re, im], "limit": limit, "values": values }).to_string())
}

/// RGBA pixels (row 0 at the top) of a sampled `p_n` phase portrait.
#[wasm_bindgen]
pub fn charpoly_portrait(family: &str, n: usize, seed: u64, grid: usize) -> Result<Vec<u8>, JsValue> {
    charpoly_portrait_impl(family, n, seed, grid).map_err(|e| JsValue::from_str(&e))
}

/// RGBA pixels of a limit-field phase portrait.
#[wasm_bindgen]
pub fn limit_portrait(family: &str, seed: u64, grid: usize) -> Result<Vec<u8>, JsValue> {
    limit_portrait_impl(family, seed, grid).map_err(|e| JsValue::from_str(&e))
}

/// JSON `{family, z, limit, values}` with `values[n-1] = E|p_n(z)|^2`.
#[wasm_bindgen]
pub fn second_moment_curve(family: &str, re: f64, im: f64, n_max: usize) -> Result<String, JsValue> {
    second_moment_curve_impl(family, re, im, n_max).map_err(|e| JsValue::from_str(&e))
}
