use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use formality_core::dmodule::FlatModule;
use formality_core::json::{self, infer_dim};
use serde_json::Value;

use crate::Common;

/// A polyvector or polydifferential operator file: a bare term list, or
/// `{"dim": d, "terms": [...]}`.
pub struct Terms {
    pub dim: Option<usize>,
    pub terms: Value,
    pub kind: Kind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Polyvector,
    Polydiff,
    Empty,
}

pub fn read_json(path: &Path) -> anyhow::Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn read_terms(path: &Path) -> anyhow::Result<Terms> {
    let v = read_json(path)?;
    let (dim, terms) = match v {
        Value::Array(_) => (None, v),
        Value::Object(mut m) => {
            let terms = m.remove("terms").ok_or_else(|| anyhow!("{}: expected a list of terms", path.display()))?;
            (m.get("dim").and_then(Value::as_u64).map(|d| d as usize), terms)
        }
        _ => bail!("{}: expected a list of terms", path.display()),
    };
    let first = terms.as_array().and_then(|a| a.first());
    let kind = match first {
        None => Kind::Empty,
        Some(t) if t.get("indices").is_some() => Kind::Polyvector,
        Some(t) if t.get("alphas").is_some() => Kind::Polydiff,
        Some(_) => bail!("{}: terms need `indices` or `alphas`", path.display()),
    };
    Ok(Terms { dim: dim.or_else(|| infer_dim(&terms)), terms, kind })
}

pub fn inputs(c: &Common, expected: usize) -> anyhow::Result<Vec<Terms>> {
    if c.inputs.len() != expected {
        bail!("expected {expected} --input file(s), got {}", c.inputs.len());
    }
    c.inputs.iter().map(|p| read_terms(p)).collect()
}

/// The common dimension of the inputs, `--dim` and `--module`.
pub fn dimension(c: &Common, terms: &[&Terms], module: Option<&Arc<FlatModule>>) -> anyhow::Result<usize> {
    let mut found: Vec<usize> = terms.iter().filter_map(|t| t.dim).collect();
    found.extend(c.dim);
    found.extend(module.map(|m| m.dim()));
    let dim = *found.first().ok_or_else(|| anyhow!("cannot infer the dimension; pass --dim"))?;
    if let Some(other) = found.iter().find(|&&d| d != dim) {
        bail!("inputs disagree on the dimension: {dim} vs {other}");
    }
    Ok(dim)
}

pub fn module(c: &Common) -> anyhow::Result<Option<Arc<FlatModule>>> {
    c.module
        .as_deref()
        .map(|p| json::module_from_json(&read_json(p)?).with_context(|| format!("module {}", p.display())))
        .transpose()
}
