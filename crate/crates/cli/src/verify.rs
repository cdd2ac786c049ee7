//! Deterministic invariant suites. A failing case is dumped as JSON.

use std::path::Path;
use std::sync::Arc;

use clap::ValueEnum;
use formality_core::algebra::rational::int;
use formality_core::algebra::Rational;
use formality_core::dmodule::FlatModule;
use formality_core::graphs::enumerate_graphs;
use formality_core::hkr::{hkr_map, model_cohomology, model_differential};
use formality_core::json::{module_to_json, multivector_to_json, polydiff_to_json};
use formality_core::polydiff::{bullet, bullet_right, hochschild_diff_m, PolyDiffOpM};
use formality_core::polyvector::{schouten, PolyVector, PolyVectorM};
use formality_core::random::{random_flat_module, random_module_vec, random_multivector, random_poly, random_polydiff};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::commands::Report;
use crate::input::read_json;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Suite {
    /// Graded antisymmetry and Jacobi identity of the Schouten bracket.
    Jacobi,
    /// Symmetry of the associator of the brace operation with module-valued cochains.
    Associator,
    /// HKR images are Hochschild cocycles.
    HkrCocycle,
    /// Constant-coefficient model complex: d² = 0 and exterior-algebra cohomology.
    ModelComplex,
    /// Graph counts against the closed-form binomial count.
    GraphCounts,
}

type Outcome = Result<usize, Value>;

fn sign(e: i64) -> Rational {
    if e.rem_euclid(2) == 1 {
        int(-1)
    } else {
        int(1)
    }
}

fn random_pv(r: &mut ChaCha8Rng, dim: usize) -> (PolyVector, i64) {
    let k = r.gen_range(-1..dim as i32);
    let terms = r.gen_range(1..=2);
    (random_multivector(r, &dim, k, terms, |r| random_poly(r, dim, 3, 2)), k as i64)
}

fn module_for(r: &mut ChaCha8Rng, fixed: Option<&Arc<FlatModule>>) -> Arc<FlatModule> {
    match fixed {
        Some(m) => m.clone(),
        None => {
            let dim = r.gen_range(1..=3);
            let rank = r.gen_range(1..=2);
            random_flat_module(r, dim, rank, 1)
        }
    }
}

fn jacobi(r: &mut ChaCha8Rng, cases: usize) -> Outcome {
    for case in 0..cases {
        let dim = r.gen_range(1..=3);
        let (u, k) = random_pv(r, dim);
        let (v, l) = random_pv(r, dim);
        let (w, _) = random_pv(r, dim);
        let dump = |what: &str| {
            json!({"case": case, "identity": what, "u": multivector_to_json(&u), "v": multivector_to_json(&v), "w": multivector_to_json(&w)})
        };
        let uv = schouten(&u, &v).unwrap();
        if uv != schouten(&v, &u).unwrap().scale(&-sign(k * l)) {
            return Err(dump("antisymmetry"));
        }
        let lhs = schouten(&u, &schouten(&v, &w).unwrap()).unwrap();
        let rhs = schouten(&uv, &w).unwrap().add(&schouten(&v, &schouten(&u, &w).unwrap()).unwrap().scale(&sign(k * l)));
        if lhs != rhs {
            return Err(dump("jacobi"));
        }
    }
    Ok(cases)
}

fn associator(r: &mut ChaCha8Rng, cases: usize, fixed: Option<&Arc<FlatModule>>) -> Outcome {
    for case in 0..cases {
        let module = module_for(r, fixed);
        let dim = module.dim();
        let op = |r: &mut ChaCha8Rng, hi| {
            let d = r.gen_range(-1..=hi);
            let terms = r.gen_range(1..=2);
            (random_polydiff(r, &dim, d, 2, terms, |r| random_poly(r, dim, 3, 2)), d as i64)
        };
        let (p, _) = op(r, 2);
        let (q, qd) = op(r, 1);
        let ld = r.gen_range(-1..=1);
        let lam: PolyDiffOpM = random_polydiff(r, &module, ld, 2, 2, |r| random_module_vec(r, &module, 2));
        let a1 = bullet(&bullet(&p, &q).unwrap(), &lam).unwrap().sub(&bullet(&p, &bullet(&q, &lam).unwrap()).unwrap());
        let a2 = bullet_right(&bullet(&p, &lam).unwrap(), &q).unwrap().sub(&bullet(&p, &bullet_right(&lam, &q).unwrap()).unwrap());
        if a1 != a2.scale(&sign(qd * ld as i64)) {
            return Err(json!({
                "case": case,
                "module": module_to_json(&module),
                "p": polydiff_to_json(&p),
                "q": polydiff_to_json(&q),
                "lambda": polydiff_to_json(&lam),
            }));
        }
    }
    Ok(cases)
}

fn hkr_cocycle(r: &mut ChaCha8Rng, cases: usize, fixed: Option<&Arc<FlatModule>>) -> Outcome {
    for case in 0..cases {
        let module = module_for(r, fixed);
        let deg = r.gen_range(-1..module.dim() as i32);
        let t: PolyVectorM = random_multivector(r, &module, deg, 2, |r| random_module_vec(r, &module, 3));
        if !hochschild_diff_m(&hkr_map(&t)).is_zero() {
            return Err(json!({"case": case, "module": module_to_json(&module), "t": multivector_to_json(&t)}));
        }
    }
    Ok(cases)
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        0
    } else {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
}

fn model_complex() -> Outcome {
    let mut checked = 0;
    for dim in 1..=2 {
        for cap in 1..=3u32 {
            for arity in 0..=3usize {
                let a = model_differential(dim, arity, cap);
                let b = model_differential(dim, arity + 1, cap);
                if !b.mul(&a).is_zero() {
                    return Err(json!({"dim": dim, "cap": cap, "arity": arity, "failure": "d^2 != 0"}));
                }
                let c = model_cohomology(dim, arity, cap);
                let expect = binomial(dim, arity);
                if c.in_stable_range() && (c.cohomology_dim != expect || c.theta_rank != expect || !c.theta_are_cocycles) {
                    return Err(json!({"dim": dim, "cap": cap, "expected": expect, "report": c}));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

fn graph_counts() -> Outcome {
    let mut checked = 0;
    for n in 1..=3usize {
        for m in 0..=3usize {
            // each first-type vertex chooses its targets among the n + m − 1 other vertices
            let slots = n * (n + m - 1);
            for e in 0..=(2 * n + m - 2) {
                let graphs = enumerate_graphs(n, m, e);
                let mut hashes: Vec<String> = graphs.iter().map(|g| g.hash()).collect();
                hashes.sort();
                hashes.dedup();
                if graphs.len() != binomial(slots, e) || hashes.len() != graphs.len() {
                    return Err(json!({"n": n, "m": m, "edges": e, "count": graphs.len(), "expected": binomial(slots, e)}));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

pub fn run(suite: Suite, seed: u64, cases: usize, module: Option<&Path>) -> anyhow::Result<Report> {
    let fixed = match module {
        Some(p) => Some(formality_core::json::module_from_json(&read_json(p)?)?),
        None => None,
    };
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let outcome = match suite {
        Suite::Jacobi => jacobi(&mut r, cases),
        Suite::Associator => associator(&mut r, cases, fixed.as_ref()),
        Suite::HkrCocycle => hkr_cocycle(&mut r, cases, fixed.as_ref()),
        Suite::ModelComplex => model_complex(),
        Suite::GraphCounts => graph_counts(),
    };
    let name = suite.to_possible_value().expect("named").get_name().to_owned();
    let options = json!({"suite": name, "seed": seed, "cases": cases, "module": module});
    let pass = outcome.is_ok();
    let result = match outcome {
        Ok(n) => json!({"checked": n}),
        Err(counterexample) => json!({"counterexample": counterexample}),
    };
    Ok(Report { body: json!({"command": "verify", "options": options, "pass": pass, "result": result}), pass })
}
