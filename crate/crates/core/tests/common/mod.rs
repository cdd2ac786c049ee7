//! Deterministic tanh-sinh quadrature of the wedge weight, written from the
//! real-variable angle formula instead of the complex closed form.

use std::f64::consts::PI;

/// Nodes and weights of tanh-sinh on (0, 1).
fn tanh_sinh(h: f64, t_max: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let k = (t_max / h) as i64;
    for i in -k..=k {
        let t = i as f64 * h;
        let u = PI / 2.0 * t.sinh();
        let x = 0.5 * (1.0 + u.tanh());
        let w = 0.5 * h * PI / 2.0 * t.cosh() / (u.cosh() * u.cosh());
        if x > 0.0 && x < 1.0 && w > 0.0 {
            out.push((x, w));
        }
    }
    out
}

/// θ(p → q) = 1 − φ/π with φ = atan2(y, q − x); returns (∂θ/∂x, ∂θ/∂y).
fn grad(x: f64, y: f64, q: f64) -> (f64, f64) {
    let r2 = (q - x) * (q - x) + y * y;
    (-y / (PI * r2), -(q - x) / (PI * r2))
}

fn wedge_density(x: f64, y: f64) -> f64 {
    let (a, b) = grad(x, y, 0.0);
    let (c, d) = grad(x, y, 1.0);
    a * d - b * c
}

pub fn wedge_quadrature() -> f64 {
    let nodes = tanh_sinh(1.0 / 32.0, 4.0);
    // x ∈ (−∞,0) ∪ (0,1) ∪ (1,∞), y ∈ (0,∞), split at the singular points
    let xmaps: [&dyn Fn(f64) -> (f64, f64); 3] = [
        &|t| (-(1.0 - t) / t, 1.0 / (t * t)),
        &|t| (t, 1.0),
        &|t| (1.0 + t / (1.0 - t), 1.0 / ((1.0 - t) * (1.0 - t))),
    ];
    let mut total = 0.0;
    for xm in xmaps {
        for &(s, ws) in &nodes {
            let (x, jx) = xm(s);
            for &(t, wt) in &nodes {
                let y = t / (1.0 - t);
                let jy = 1.0 / ((1.0 - t) * (1.0 - t));
                total += ws * wt * jx * jy * wedge_density(x, y);
            }
        }
    }
    total
}

