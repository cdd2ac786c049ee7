//! Browser bindings: star products of Poisson bivectors, Monte-Carlo
//! convergence of the wedge weight, and the angle function θ.

use formality_core::algebra::Poly;
use formality_core::formality::{build_star, McConfig, PoissonInput, WeightSource};
use formality_core::graphs::AdmissibleGraph;
use formality_core::json::multivector_from_json;
use formality_core::polyvector::PolyVector;
use formality_core::weights::{theta, weight_mc};
use num_complex::Complex64;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// `"[2, 0, 1]"` → `x1^2*x3`.
fn monomial(key: &str) -> String {
    let exps = key.trim_matches(|c| c == '[' || c == ']').split(',').filter_map(|s| s.trim().parse::<u32>().ok());
    let factors: Vec<String> = exps
        .enumerate()
        .filter(|&(_, e)| e > 0)
        .map(|(i, e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{e}", i + 1) })
        .collect();
    if factors.is_empty() {
        "1".into()
    } else {
        factors.join("*")
    }
}

pub fn star_json(dim: usize, pi: &str, f: &str, g: &str, h_cap: usize, samples: usize, seed: u64) -> Result<Value, String> {
    let v: Value = serde_json::from_str(pi).map_err(|e| format!("bivector: {e}"))?;
    let pi: PolyVector = multivector_from_json(&v, &dim).map_err(|e| e.to_string())?;
    let pi = PoissonInput::new(pi).map_err(|e| e.to_string())?;
    let f = Poly::parse(dim, f).map_err(|e| format!("f: {e}"))?;
    let g = Poly::parse(dim, g).map_err(|e| format!("g: {e}"))?;
    let mut src = WeightSource::new(McConfig { samples, seed });
    let s = build_star(&pi, h_cap, &mut src).map_err(|e| e.to_string())?;
    let series = s.star_apply(&f, &g).map_err(|e| e.to_string())?;
    let orders: Vec<Value> = (0..=h_cap)
        .map(|k| {
            let ev = series.coeff(k).evaluate(s.table());
            let terms: Vec<Value> = ev
                .coordinates
                .iter()
                .filter(|c| c.value.abs() > 1e-12 || c.std_error > 0.0)
                .map(|c| json!({"monomial": monomial(&c.key), "value": c.value, "std_error": c.std_error}))
                .collect();
            json!({"order": k, "terms": terms})
        })
        .collect();
    let graphs: Vec<Value> = s
        .table()
        .iter()
        .map(|(g, w)| json!({"graph": g.to_json(), "weight": w.value, "std_error": w.std_error}))
        .collect();
    Ok(json!({"orders": orders, "weights": graphs, "skipped": s.skipped().len()}))
}

/// Estimates of the wedge weight at doubling sample counts.
pub fn wedge_json(max_samples: usize, seed: u64) -> Result<Value, String> {
    let g = AdmissibleGraph::wedge();
    let mut n = 256;
    let mut rows = Vec::new();
    while n <= max_samples.max(256) {
        let est = weight_mc(&g, n, seed).map_err(|e| e.to_string())?;
        rows.push(json!({"samples": n, "value": est.value, "std_error": est.std_error}));
        n *= 2;
    }
    Ok(Value::Array(rows))
}

/// θ(z, w) for w on a `width × height` grid over `[x0, x1] × (0, y1]`,
/// row-major with the top row first. Points on the diagonal give NaN.
pub fn theta_grid(zx: f64, zy: f64, x0: f64, x1: f64, y1: f64, width: usize, height: usize) -> Vec<f64> {
    let z = Complex64::new(zx, zy);
    let mut out = Vec::with_capacity(width * height);
    for r in 0..height {
        let y = y1 * (height - r) as f64 / height as f64;
        for c in 0..width {
            let x = x0 + (x1 - x0) * (c as f64 + 0.5) / width as f64;
            let w = Complex64::new(x, y);
            out.push(if (w - z).norm() < 1e-12 { f64::NAN } else { theta(z, w) });
        }
    }
    out
}

#[wasm_bindgen]
pub fn star_product(dim: usize, pi: &str, f: &str, g: &str, h_cap: usize, samples: usize, seed: u64) -> Result<String, JsError> {
    star_json(dim, pi, f, g, h_cap, samples, seed).map(|v| v.to_string()).map_err(err)
}

#[wasm_bindgen]
pub fn wedge_convergence(max_samples: usize, seed: u64) -> Result<String, JsError> {
    wedge_json(max_samples, seed).map(|v| v.to_string()).map_err(err)
}

#[wasm_bindgen]
pub fn theta_field(zx: f64, zy: f64, x0: f64, x1: f64, y1: f64, width: usize, height: usize) -> Vec<f64> {
    theta_grid(zx, zy, x0, x1, y1, width, height)
}
