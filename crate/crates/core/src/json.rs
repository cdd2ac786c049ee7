//! JSON input and output. Rationals are strings, never floats; indices and
//! axes are 0-based.
//!
//! A coefficient is a polynomial object `{"dim", "terms"}`, a polynomial in
//! text form such as `"x1^2 - 1/2*x2"`, or (for module-valued data) a list of
//! those, one per basis element of the module.

use std::sync::Arc;

use serde_json::{json, Value};

use crate::algebra::rational::format_rational;
use crate::algebra::{MultiIndex, Poly};
use crate::coefficient::Coefficient;
use crate::dmodule::{FlatModule, ModuleVec};
use crate::error::{Error, Result};
use crate::formality::{SkippedGraph, StarProduct};
use crate::polydiff::Polydiff;
use crate::polyvector::Multivector;
use crate::weighted::{Evaluation, Weighted, WeightTable};

fn invalid(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Parses a polynomial given as an object or as text.
pub fn poly_from_json(v: &Value, dim: usize) -> Result<Poly> {
    let p = match v {
        Value::String(s) => Poly::parse(dim, s)?,
        Value::Object(_) => serde_json::from_value::<Poly>(v.clone())?,
        _ => return Err(invalid(format!("expected a polynomial, got {v}"))),
    };
    if p.dim() != dim {
        return Err(Error::DimensionMismatch(dim, p.dim()));
    }
    Ok(p)
}

pub fn poly_to_json(p: &Poly) -> Value {
    serde_json::to_value(p).expect("polynomials serialize")
}

/// The first `"dim"` field found anywhere in `v`.
pub fn infer_dim(v: &Value) -> Option<usize> {
    match v {
        Value::Object(m) => m.get("dim").and_then(Value::as_u64).map(|d| d as usize).or_else(|| m.values().find_map(infer_dim)),
        Value::Array(a) => a.iter().find_map(infer_dim),
        _ => None,
    }
}

pub fn module_from_json(v: &Value) -> Result<Arc<FlatModule>> {
    let field = |k: &str| v.get(k).ok_or_else(|| invalid(format!("module is missing `{k}`")));
    let dim = field("dim")?.as_u64().ok_or_else(|| invalid("`dim` must be a non-negative integer"))? as usize;
    let rank = field("rank")?.as_u64().ok_or_else(|| invalid("`rank` must be a non-negative integer"))? as usize;
    let conn = field("connection")?.as_array().ok_or_else(|| invalid("`connection` must be a list"))?;
    if conn.len() != dim {
        return Err(invalid(format!("expected {dim} connection matrices, got {}", conn.len())));
    }
    let mut mats = Vec::with_capacity(dim);
    for a in conn {
        let rows = a.as_array().filter(|r| r.len() == rank).ok_or_else(|| invalid(format!("connection matrices must be {rank}x{rank}")))?;
        let mut mat = Vec::with_capacity(rank);
        for row in rows {
            let row = row.as_array().filter(|r| r.len() == rank).ok_or_else(|| invalid(format!("connection matrices must be {rank}x{rank}")))?;
            mat.push(row.iter().map(|p| poly_from_json(p, dim)).collect::<Result<Vec<_>>>()?);
        }
        mats.push(mat);
    }
    FlatModule::new(dim, rank, mats)
}

pub fn module_to_json(m: &FlatModule) -> Value {
    let conn: Vec<Value> = m
        .connection()
        .iter()
        .map(|a| Value::Array(a.iter().map(|row| Value::Array(row.iter().map(poly_to_json).collect())).collect()))
        .collect();
    json!({"dim": m.dim(), "rank": m.rank(), "connection": conn})
}

/// Coefficients with a JSON form.
pub trait JsonCoefficient: Coefficient {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value, ctx: &Self::Ctx) -> Result<Self>;
}

impl JsonCoefficient for Poly {
    fn to_json(&self) -> Value {
        poly_to_json(self)
    }
    fn from_json(v: &Value, dim: &usize) -> Result<Self> {
        poly_from_json(v, *dim)
    }
}

impl JsonCoefficient for ModuleVec {
    fn to_json(&self) -> Value {
        Value::Array(self.entries().iter().map(poly_to_json).collect())
    }
    fn from_json(v: &Value, module: &Arc<FlatModule>) -> Result<Self> {
        let entries = match v {
            Value::Array(a) => a.iter().map(|p| poly_from_json(p, module.dim())).collect::<Result<Vec<_>>>()?,
            _ if module.rank() == 1 => vec![poly_from_json(v, module.dim())?],
            _ => return Err(invalid("module coefficients must be lists of polynomials")),
        };
        ModuleVec::new(module.clone(), entries)
    }
}

fn items(v: &Value, what: &str) -> Result<Vec<Value>> {
    match v {
        Value::Array(a) => Ok(a.clone()),
        Value::Object(m) if m.contains_key("terms") && !m.contains_key("dim") => items(&m["terms"], what),
        _ => Err(invalid(format!("a {what} is a list of terms"))),
    }
}

fn degree_field(item: &Value, expected: usize) -> Result<()> {
    match item.get("degree") {
        None => Ok(()),
        Some(d) if d.as_i64() == Some(expected as i64 - 1) => Ok(()),
        Some(d) => Err(invalid(format!("degree {d} does not match {expected} slots"))),
    }
}

/// `[{"degree": k, "indices": [j₀, …, j_k], "coef": …}]`; unsorted indices
/// pick up the permutation sign.
pub fn multivector_from_json<C: JsonCoefficient>(v: &Value, ctx: &C::Ctx) -> Result<Multivector<C>> {
    let dim = C::ctx_dim(ctx);
    let mut out = Multivector::zero(ctx.clone());
    for item in items(v, "polyvector")? {
        let idx: Vec<usize> = serde_json::from_value(item.get("indices").cloned().ok_or_else(|| invalid("term is missing `indices`"))?)?;
        if let Some(&axis) = idx.iter().find(|&&j| j >= dim) {
            return Err(Error::AxisOutOfRange { axis, dim });
        }
        degree_field(&item, idx.len())?;
        let c = C::from_json(item.get("coef").ok_or_else(|| invalid("term is missing `coef`"))?, ctx)?;
        out.add_unsorted(&idx, c);
    }
    Ok(out)
}

pub fn multivector_to_json<C: JsonCoefficient>(t: &Multivector<C>) -> Value {
    Value::Array(
        t.terms()
            .map(|(idx, c)| json!({"degree": idx.len() as i64 - 1, "indices": idx, "coef": c.to_json()}))
            .collect(),
    )
}

/// `[{"degree": k, "alphas": [α₀, …, α_k], "coef": …}]`.
pub fn polydiff_from_json<C: JsonCoefficient>(v: &Value, ctx: &C::Ctx) -> Result<Polydiff<C>> {
    let dim = C::ctx_dim(ctx);
    let mut out = Polydiff::zero(ctx.clone());
    for item in items(v, "polydifferential operator")? {
        let alphas: Vec<Vec<u32>> = serde_json::from_value(item.get("alphas").cloned().ok_or_else(|| invalid("term is missing `alphas`"))?)?;
        if alphas.iter().any(|a| a.len() != dim) {
            return Err(invalid(format!("every multi-index needs {dim} entries")));
        }
        degree_field(&item, alphas.len())?;
        let c = C::from_json(item.get("coef").ok_or_else(|| invalid("term is missing `coef`"))?, ctx)?;
        out.add_term(alphas.iter().map(|a| MultiIndex::from_slice(a)).collect(), c);
    }
    Ok(out)
}

pub fn polydiff_to_json<C: JsonCoefficient>(t: &Polydiff<C>) -> Value {
    Value::Array(
        t.terms()
            .map(|(key, c)| {
                let alphas: Vec<&[u32]> = key.iter().map(MultiIndex::as_slice).collect();
                json!({"degree": key.len() as i64 - 1, "alphas": alphas, "coef": c.to_json()})
            })
            .collect(),
    )
}

/// Terms of a weighted value: one entry per weight monomial, listing the
/// graphs whose weights multiply the exact part.
pub fn weighted_terms<T: crate::weighted::Linear>(w: &Weighted<T>, table: &WeightTable, exact: impl Fn(&T) -> Value) -> Vec<Value> {
    w.terms()
        .map(|(mono, t)| {
            let graphs: Vec<Value> = mono
                .iter()
                .map(|&i| {
                    let (g, est) = table.get(i);
                    json!({"hash": g.hash(), "weight": est.value, "std_error": est.std_error})
                })
                .collect();
            json!({"graphs": graphs, "operator": exact(t)})
        })
        .collect()
}

pub fn evaluation_to_json(e: &Evaluation) -> Value {
    serde_json::to_value(e).expect("evaluations serialize")
}

pub fn skipped_to_json(s: &[SkippedGraph]) -> Value {
    serde_json::to_value(s).expect("skipped graphs serialize")
}

/// `{order, terms: [{h_order, graphs, operator}], defects}`.
pub fn star_report(s: &StarProduct, defects: Value) -> Value {
    let mut terms = Vec::new();
    for k in 0..=s.cap() {
        for mut t in weighted_terms(s.coeff(k), s.table(), polydiff_to_json) {
            t["h_order"] = json!(k);
            terms.push(t);
        }
    }
    json!({
        "order": s.cap(),
        "dim": s.dim(),
        "terms": terms,
        "skipped_graphs": skipped_to_json(s.skipped()),
        "defects": defects,
    })
}

pub fn rational_string(r: &crate::algebra::Rational) -> Value {
    Value::String(format_rational(r))
}
