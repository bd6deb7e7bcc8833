//! Browser bindings for `flagcurv`.
//!
//! Each operation has a plain Rust function returning JSON (tested natively)
//! and a thin `#[wasm_bindgen]` wrapper that turns errors into JS exceptions.
//! Metrics use the CLI shorthand: `funk`, `custom:<F>`, `riemannian:<row>;<row>`.

use flagcurv::cfc::{cfc_check, Tolerances};
use flagcurv::geometry::{Pipeline, CURVATURE_ORDER};
use flagcurv::projective::{beltrami_check, ProjectiveFactor};
use flagcurv::{MetricDefinition, PhasePoint};
use serde_json::json;
use wasm_bindgen::prelude::*;

const MAX_SAMPLES: usize = 2000;
const MAX_ANGLES: usize = 2000;

fn metric(spec: &str, n: usize) -> Result<MetricDefinition, String> {
    MetricDefinition::from_shorthand(spec, n).map_err(|e| e.to_string())
}

fn check_samples(samples: usize) -> Result<(), String> {
    if samples == 0 || samples > MAX_SAMPLES {
        return Err(format!("samples must be between 1 and {MAX_SAMPLES}"));
    }
    Ok(())
}

/// Two Euclidean-orthonormal vectors orthogonal to `y`.
fn transverse_plane(y: &[f64]) -> Result<(Vec<f64>, Vec<f64>), String> {
    let n = y.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let ny: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if ny == 0.0 {
        return Err("y must be nonzero".into());
    }
    basis.push(y.iter().map(|v| v / ny).collect());
    for k in 0..n {
        let mut v: Vec<f64> = (0..n).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
            v.iter_mut().zip(b).for_each(|(a, c)| *a -= d * c);
        }
        let len = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if len > 1e-8 {
            basis.push(v.iter().map(|a| a / len).collect());
        }
        if basis.len() == 3 {
            break;
        }
    }
    if basis.len() < 3 {
        return Err("need n ≥ 3 for a plane of flags".into());
    }
    Ok((basis[1].clone(), basis[2].clone()))
}

/// Flag curvature `κ(x, y, X(θ))` for `X(θ) = cos θ·e₁ + sin θ·e₂` over `θ ∈ [0, π)`.
pub fn flag_curvature_curve(spec: &str, n: usize, x: &[f64], y: &[f64], angles: usize) -> Result<String, String> {
    if angles == 0 || angles > MAX_ANGLES {
        return Err(format!("angles must be between 1 and {MAX_ANGLES}"));
    }
    if x.len() != n || y.len() != n {
        return Err(format!("x and y need {n} components"));
    }
    let def = metric(spec, n)?;
    let p = PhasePoint::new(x.to_vec(), y.to_vec());
    let pipe = Pipeline::new(&def, &p, CURVATURE_ORDER).map_err(|e| e.to_string())?;
    let (e1, e2) = transverse_plane(y)?;
    let mut thetas = Vec::with_capacity(angles);
    let mut kappas = Vec::with_capacity(angles);
    for k in 0..angles {
        let t = std::f64::consts::PI * k as f64 / angles as f64;
        let dir: Vec<f64> = e1.iter().zip(&e2).map(|(a, b)| t.cos() * a + t.sin() * b).collect();
        thetas.push(t);
        kappas.push(pipe.flag_curvature(&dir).map_err(|e| e.to_string())?);
    }
    Ok(json!({ "metric": def.label, "x": x, "y": y, "theta": thetas, "kappa": kappas }).to_string())
}

/// The CFC report for `samples` seeded points, without the per-point table.
pub fn cfc_summary(spec: &str, n: usize, samples: usize, seed: u64) -> Result<String, String> {
    check_samples(samples)?;
    let def = metric(spec, n)?;
    let mut report = cfc_check(&def, samples, seed, Tolerances::default(), 1).map_err(|e| e.to_string())?;
    report.points.clear();
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

/// The Beltrami transfer report; `target` may be empty.
pub fn beltrami_summary(
    spec: &str,
    n: usize,
    factor: &str,
    target: &str,
    samples: usize,
    seed: u64,
) -> Result<String, String> {
    check_samples(samples)?;
    let def = metric(spec, n)?;
    let factor = ProjectiveFactor::parse(factor, n).map_err(|e| e.to_string())?;
    let target = match target.trim() {
        "" => None,
        t => Some(metric(t, n)?),
    };
    let mut report = beltrami_check(&def, &factor, target.as_ref(), samples, seed, Tolerances::default(), 1)
        .map_err(|e| e.to_string())?;
    report.points.clear();
    report.transformed_cfc.points.clear();
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = flagCurvatureCurve)]
pub fn flag_curvature_curve_js(
    spec: &str,
    n: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    angles: usize,
) -> Result<String, JsError> {
    js(flag_curvature_curve(spec, n, &x, &y, angles))
}

#[wasm_bindgen(js_name = cfcCheck)]
pub fn cfc_check_js(spec: &str, n: usize, samples: usize, seed: u32) -> Result<String, JsError> {
    js(cfc_summary(spec, n, samples, seed.into()))
}

#[wasm_bindgen(js_name = beltramiCheck)]
pub fn beltrami_check_js(
    spec: &str,
    n: usize,
    factor: &str,
    target: &str,
    samples: usize,
    seed: u32,
) -> Result<String, JsError> {
    js(beltrami_summary(spec, n, factor, target, samples, seed.into()))
}
