use std::sync::Arc;

use anyhow::{bail, Context};
use formality_core::algebra::Poly;
use formality_core::cohomology::cohomology_compare;
use formality_core::dmodule::{FlatModule, ModuleVec};
use formality_core::formality::{assoc_defect, build_star, McConfig, PoissonInput, WeightSource};
use formality_core::graphs::{enumerate_graphs, AdmissibleGraph};
use formality_core::hkr::hkr_map;
use formality_core::json::*;
use formality_core::polydiff::{act_g, gerstenhaber, hochschild_diff_m, PolyDiffOpM};
use formality_core::polyvector::{schouten, schouten_act, PolyVector, PolyVectorM};
use formality_core::weights::{weight as estimate_weight, WeightCache, NORMALIZATION_VERSION};
use serde_json::{json, Value};

use crate::input::{self, Kind, Terms};
use crate::{Common, Mc};

pub struct Report {
    pub body: Value,
    pub pass: bool,
}

fn common_options(c: &Common) -> Value {
    json!({
        "inputs": c.inputs,
        "module": c.module,
        "dim": c.dim,
    })
}

fn mc_options(mc: &Mc) -> Value {
    json!({
        "samples": mc.samples,
        "seed": mc.seed,
        "cache": mc.cache,
        "tolerance_sigmas": mc.tolerance,
        "normalization": NORMALIZATION_VERSION,
    })
}

fn report(command: &str, options: Value, result: Value, pass: bool) -> Report {
    Report { body: json!({"command": command, "options": options, "pass": pass, "result": result}), pass }
}

fn open_cache(mc: &Mc) -> anyhow::Result<Option<WeightCache>> {
    let Some(dir) = &mc.cache else { return Ok(None) };
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(Some(WeightCache::open(dir.join("weights.jsonl"))?))
}

fn weight_source(mc: &Mc) -> anyhow::Result<WeightSource> {
    let config = McConfig { samples: mc.samples, seed: mc.seed };
    Ok(match open_cache(mc)? {
        Some(cache) => WeightSource::with_cache(config, cache),
        None => WeightSource::new(config),
    })
}

fn same_kind(a: &Terms, b: &Terms) -> anyhow::Result<Kind> {
    match (a.kind, b.kind) {
        (Kind::Empty, k) | (k, Kind::Empty) => Ok(if k == Kind::Empty { Kind::Polyvector } else { k }),
        (x, y) if x == y => Ok(x),
        _ => bail!("cannot mix polyvectors and polydifferential operators"),
    }
}

fn module_or_trivial(c: &Common, dim: usize) -> anyhow::Result<Arc<FlatModule>> {
    Ok(input::module(c)?.unwrap_or_else(|| FlatModule::trivial(dim, 1)))
}

pub fn bracket(c: &Common) -> anyhow::Result<Report> {
    let ins = input::inputs(c, 2)?;
    let dim = input::dimension(c, &[&ins[0], &ins[1]], None)?;
    let result = match same_kind(&ins[0], &ins[1])? {
        Kind::Polydiff => {
            let p = polydiff_from_json::<Poly>(&ins[0].terms, &dim)?;
            let q = polydiff_from_json::<Poly>(&ins[1].terms, &dim)?;
            json!({"bracket": "gerstenhaber", "value": polydiff_to_json(&gerstenhaber(&p, &q)?)})
        }
        _ => {
            let u = multivector_from_json::<Poly>(&ins[0].terms, &dim)?;
            let v = multivector_from_json::<Poly>(&ins[1].terms, &dim)?;
            json!({"bracket": "schouten", "value": multivector_to_json(&schouten(&u, &v)?)})
        }
    };
    Ok(report("bracket", common_options(c), json!({"dim": dim, "exact": true, "output": result}), true))
}

pub fn act(c: &Common) -> anyhow::Result<Report> {
    let ins = input::inputs(c, 2)?;
    let module = input::module(c)?;
    let dim = input::dimension(c, &[&ins[0], &ins[1]], module.as_ref())?;
    let module = module.unwrap_or_else(|| FlatModule::trivial(dim, 1));
    let result = match same_kind(&ins[0], &ins[1])? {
        Kind::Polydiff => {
            let p = polydiff_from_json::<Poly>(&ins[0].terms, &dim)?;
            let t = polydiff_from_json::<ModuleVec>(&ins[1].terms, &module)?;
            json!({"action": "gerstenhaber", "value": polydiff_to_json(&act_g(&p, &t)?)})
        }
        _ => {
            let u = multivector_from_json::<Poly>(&ins[0].terms, &dim)?;
            let t = multivector_from_json::<ModuleVec>(&ins[1].terms, &module)?;
            json!({"action": "schouten", "value": multivector_to_json(&schouten_act(&u, &t)?)})
        }
    };
    Ok(report("act", common_options(c), json!({"dim": dim, "rank": module.rank(), "exact": true, "output": result}), true))
}

pub fn hkr(c: &Common) -> anyhow::Result<Report> {
    let ins = input::inputs(c, 1)?;
    let module = input::module(c)?;
    let dim = input::dimension(c, &[&ins[0]], module.as_ref())?;
    let module = module.unwrap_or_else(|| FlatModule::trivial(dim, 1));
    if ins[0].kind == Kind::Polydiff {
        bail!("hkr takes a polyvector");
    }
    let t: PolyVectorM = multivector_from_json(&ins[0].terms, &module)?;
    let image: PolyDiffOpM = hkr_map(&t);
    let cocycle = hochschild_diff_m(&image).is_zero();
    let result = json!({"dim": dim, "exact": true, "output": polydiff_to_json(&image), "cocycle": cocycle});
    Ok(report("hkr", common_options(c), result, cocycle))
}

pub fn graphs(n: usize, m: usize, edges: Option<usize>) -> anyhow::Result<Report> {
    if n == 0 {
        bail!("graphs need at least one first-type vertex");
    }
    let e = match edges {
        Some(e) => e,
        None => (2 * n + m).checked_sub(2).context("2n + m − 2 is negative")?,
    };
    let list = enumerate_graphs(n, m, e);
    let options = json!({"n": n, "m": m, "edges": e});
    let graphs: Vec<Value> = list.iter().map(AdmissibleGraph::to_json).collect();
    Ok(report("graphs", options, json!({"count": list.len(), "graphs": graphs}), true))
}

pub fn weight(graph: Option<&str>, c: &Common, mc: &Mc) -> anyhow::Result<Report> {
    let g = match (graph, c.inputs.as_slice()) {
        (Some(s), []) => AdmissibleGraph::from_json(&serde_json::from_str(s).context("parsing --graph")?)?,
        (None, [path]) => AdmissibleGraph::from_json(&input::read_json(path)?)?,
        _ => bail!("give the graph with either --graph or one --input file"),
    };
    let mut cache = open_cache(mc)?;
    let est = estimate_weight(&g, mc.samples, mc.seed, cache.as_mut())?;
    let rel = g.relevance();
    let result = json!({
        "graph": g.to_json(),
        "hash": g.hash(),
        "relevance": {"edge_count": rel.edge_count, "dimension": rel.dimension, "relevant": rel.relevant},
        "estimate": est,
    });
    let pass = est.value.is_finite() && est.std_error.is_finite();
    let mut options = mc_options(mc);
    options["graph_input"] = json!(graph.map(str::to_owned).or_else(|| c.inputs.first().map(|p| p.display().to_string())));
    Ok(report("weight", options, result, pass))
}

fn poisson(c: &Common) -> anyhow::Result<PoissonInput> {
    let ins = input::inputs(c, 1)?;
    if ins[0].kind == Kind::Polydiff {
        bail!("expected a bivector");
    }
    let module = input::module(c)?;
    let dim = input::dimension(c, &[&ins[0]], module.as_ref())?;
    let pi: PolyVector = multivector_from_json(&ins[0].terms, &dim)?;
    Ok(PoissonInput::new(pi)?)
}

fn star_options(c: &Common, mc: &Mc, h_cap: usize) -> Value {
    let mut o = mc_options(mc);
    o["h_cap"] = json!(h_cap);
    o["input"] = common_options(c);
    o
}

pub fn star(c: &Common, mc: &Mc, h_cap: usize) -> anyhow::Result<Report> {
    let pi = poisson(c)?;
    let s = build_star(&pi, h_cap, &mut weight_source(mc)?)?;
    let mut body = star_report(&s, json!({}));
    body["complete"] = json!(s.skipped().is_empty());
    Ok(report("star", star_options(c, mc, h_cap), body, true))
}

pub fn assoc(c: &Common, mc: &Mc, h_cap: usize, fns: [Option<String>; 3]) -> anyhow::Result<Report> {
    let pi = poisson(c)?;
    let d = pi.dim();
    let defaults = ["x1".to_string(), format!("x{d}"), format!("x1*x{d}")];
    let mut polys = Vec::new();
    for (given, default) in fns.iter().zip(&defaults) {
        let text = given.as_ref().unwrap_or(default);
        polys.push(Poly::parse(d, text).with_context(|| format!("parsing `{text}`"))?);
    }
    let s = build_star(&pi, h_cap, &mut weight_source(mc)?)?;
    let defect = assoc_defect(&s, &polys[0], &polys[1], &polys[2])?;
    let pass = defect.within(mc.tolerance);
    let mut body = star_report(&s, serde_json::to_value(&defect)?);
    body["functions"] = json!(polys.iter().map(|p| p.to_string()).collect::<Vec<_>>());
    body["complete"] = json!(s.skipped().is_empty());
    Ok(report("assoc", star_options(c, mc, h_cap), body, pass))
}

pub fn cohomology(c: &Common, mc: &Mc, degree_cap: u32, symbol_cap: u32, residual: bool) -> anyhow::Result<Report> {
    let pi = poisson(c)?;
    let module = module_or_trivial(c, pi.dim())?;
    let mut src = weight_source(mc)?;
    let rep = cohomology_compare(&pi, &module, degree_cap, symbol_cap, residual.then_some(&mut src))?;
    let residual_ok = rep.residual_h1.as_ref().is_none_or(|r| r.max_sigma <= mc.tolerance || r.max_abs <= 1e-9);
    let pass = rep.h0_agree && rep.leading_agree && rep.classes_verified && residual_ok;
    let mut options = mc_options(mc);
    options["degree_cap"] = json!(degree_cap);
    options["symbol_cap"] = json!(symbol_cap);
    options["residual"] = json!(residual);
    options["input"] = common_options(c);
    Ok(report("cohomology", options, serde_json::to_value(&rep)?, pass))
}
