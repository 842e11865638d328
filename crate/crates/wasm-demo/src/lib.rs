//! Browser bindings for the static demo page in `www/`.
//!
//! Each exported function has a plain Rust counterpart so the numerics can be
//! tested natively; the wasm wrappers only convert errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use divgeo::divergence::bregman_scalar;
use divgeo::geometry::{distance, geodesic};
use divgeo::prediction::{d_mean_sample, d_variance_sample, EmpiricalSample};
use divgeo::{Generator, Point};
use wasm_bindgen::prelude::*;

fn parse(kind: &str) -> Result<Generator, String> {
    kind.parse().map_err(|e: divgeo::Error| e.to_string())
}

/// Flattened `[t, x, y]` triples along the geodesic from `(x0, y0)` to
/// `(x1, y1)`.
pub fn geodesic_samples(kind: &str, x0: f64, y0: f64, x1: f64, y1: f64, n: usize) -> Result<Vec<f64>, String> {
    let gen = parse(kind)?;
    if n < 2 {
        return Err("need at least two samples".into());
    }
    let path = geodesic(&gen, &Point::new(vec![x0, y0]), &Point::new(vec![x1, y1])).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(3 * n);
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        let p = path.sample(t).map_err(|e| e.to_string())?;
        out.extend([t, p[0], p[1]]);
    }
    Ok(out)
}

/// Flattened `[y, δ(y, x)², ½d(x, y)²]` triples for `y` on an even grid.
pub fn divergence_profile(kind: &str, x: f64, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, String> {
    let gen = parse(kind)?;
    if n < 2 || !(lo < hi) {
        return Err("need n >= 2 and lo < hi".into());
    }
    let px = Point::scalar(x);
    let mut out = Vec::with_capacity(3 * n);
    for i in 0..n {
        let y = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let div = bregman_scalar(&gen, y, x).map_err(|e| e.to_string())?;
        let d = distance(&gen, &px, &Point::scalar(y)).map_err(|e| e.to_string())?;
        out.extend([y, div, 0.5 * d * d]);
    }
    Ok(out)
}

/// `[d-mean, arithmetic mean, sample d-variance]` of a scalar sample
/// (d-variance is NaN for a single value).
pub fn sample_means(kind: &str, values: &[f64]) -> Result<Vec<f64>, String> {
    let gen = parse(kind)?;
    let sample = EmpiricalSample::from_scalars(values).map_err(|e| e.to_string())?;
    let dm = d_mean_sample(&gen, &sample).map_err(|e| e.to_string())?;
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = if values.len() > 1 {
        d_variance_sample(&gen, &sample).map_err(|e| e.to_string())?
    } else {
        f64::NAN
    };
    Ok(vec![dm[0], mean, var])
}

#[wasm_bindgen(js_name = geodesicCurve)]
pub fn geodesic_curve(kind: &str, x0: f64, y0: f64, x1: f64, y1: f64, n: usize) -> Result<Vec<f64>, JsError> {
    geodesic_samples(kind, x0, y0, x1, y1, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = divergenceProfile)]
pub fn divergence_profile_js(kind: &str, x: f64, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, JsError> {
    divergence_profile(kind, x, lo, hi, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = sampleMeans)]
pub fn sample_means_js(kind: &str, values: Vec<f64>) -> Result<Vec<f64>, JsError> {
    sample_means(kind, &values).map_err(|e| JsError::new(&e))
}
