//! Admissible graphs and their multidifferential operators `B_Γ`.
//!
//! First-type vertices are `1..=n`, second-type vertices `1̄..=m̄`. Edges
//! always start at a first-type vertex and are kept sorted by source, then
//! target, with first-type targets before second-type ones. The `j`-th
//! outgoing edge of vertex `k` in this order carries the `j`-th index of the
//! polyvector placed at `k`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::perm::permutations;
use crate::algebra::{MultiIndex, Poly};
use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::polydiff::Polydiff;
use crate::polyvector::{Multivector, PolyVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    /// 1-based first-type vertex.
    First(usize),
    /// 1-based second-type vertex.
    Second(usize),
}

impl Vertex {
    fn encode(self) -> i64 {
        match self {
            Vertex::First(k) => k as i64,
            Vertex::Second(l) => -(l as i64),
        }
    }

    fn decode(v: i64) -> Result<Self> {
        match v {
            0 => Err(Error::Invalid("vertex 0 does not exist".into())),
            v if v > 0 => Ok(Vertex::First(v as usize)),
            v => Ok(Vertex::Second((-v) as usize)),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AdmissibleGraph {
    n: usize,
    m: usize,
    edges: Vec<(usize, Vertex)>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    m: usize,
    edges: Vec<[i64; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WeightRelevance {
    pub edge_count: usize,
    pub dimension: i64,
    pub relevant: bool,
}

impl AdmissibleGraph {
    /// Validates the admissibility conditions and sorts the edges.
    pub fn new(n: usize, m: usize, mut edges: Vec<(usize, Vertex)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("an admissible graph needs a first-type vertex".into()));
        }
        for &(s, t) in &edges {
            if s == 0 || s > n {
                return Err(Error::Invalid(format!("edge source {s} is not a first-type vertex")));
            }
            match t {
                Vertex::First(k) if k == 0 || k > n => return Err(Error::Invalid(format!("edge target {k} out of range"))),
                Vertex::First(k) if k == s => return Err(Error::Invalid(format!("loop at vertex {s}"))),
                Vertex::Second(l) if l == 0 || l > m => {
                    return Err(Error::Invalid(format!("edge target -{l} out of range")))
                }
                _ => {}
            }
        }
        edges.sort();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invalid("duplicate edge".into()));
        }
        Ok(AdmissibleGraph { n, m, edges })
    }

    /// From `(source, target)` pairs with second-type targets negative.
    pub fn from_encoded(n: usize, m: usize, edges: &[[i64; 2]]) -> Result<Self> {
        let mut out = Vec::with_capacity(edges.len());
        for &[s, t] in edges {
            if s <= 0 {
                return Err(Error::Invalid(format!("edge source {s} is not a first-type vertex")));
            }
            out.push((s as usize, Vertex::decode(t)?));
        }
        Self::new(n, m, out)
    }

    /// The graph with one vertex and an edge to each of `m` ground vertices.
    pub fn star(m: usize) -> Self {
        Self::new(1, m, (1..=m).map(|l| (1, Vertex::Second(l))).collect()).expect("valid")
    }

    /// The wedge: `1 → 1̄`, `1 → 2̄`.
    pub fn wedge() -> Self {
        Self::star(2)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> &[(usize, Vertex)] {
        &self.edges
    }

    pub fn encoded_edges(&self) -> Vec<[i64; 2]> {
        self.edges.iter().map(|&(s, t)| [s as i64, t.encode()]).collect()
    }

    /// Targets of the edges leaving first-type vertex `k`, in edge order.
    pub fn out_edges(&self, k: usize) -> Vec<Vertex> {
        self.edges.iter().filter(|(s, _)| *s == k).map(|(_, t)| *t).collect()
    }

    pub fn out_degree(&self, k: usize) -> usize {
        self.edges.iter().filter(|(s, _)| *s == k).count()
    }

    pub fn in_degree(&self, v: Vertex) -> usize {
        self.edges.iter().filter(|(_, t)| *t == v).count()
    }

    pub fn relevance(&self) -> WeightRelevance {
        let dimension = 2 * self.n as i64 + self.m as i64 - 2;
        WeightRelevance { edge_count: self.edges.len(), dimension, relevant: self.edges.len() as i64 == dimension }
    }

    /// Canonical serialization; equal graphs give equal strings.
    pub fn hash(&self) -> String {
        serde_json::to_string(&GraphJson { n: self.n, m: self.m, edges: self.encoded_edges() }).expect("serializable")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(GraphJson { n: self.n, m: self.m, edges: self.encoded_edges() }).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let g: GraphJson = serde_json::from_value(v.clone())?;
        Self::from_encoded(g.n, g.m, &g.edges)
    }
}

impl fmt::Debug for AdmissibleGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.hash())
    }
}

/// Checks the admissibility conditions on raw data without constructing.
pub fn is_admissible(n: usize, m: usize, edges: &[(usize, Vertex)]) -> bool {
    AdmissibleGraph::new(n, m, edges.to_vec()).is_ok()
}

/// All admissible graphs of type `(n, m)` with `edge_count` edges, sorted.
///
/// Built vertex by vertex from the subsets of allowed targets.
pub fn enumerate_graphs(n: usize, m: usize, edge_count: usize) -> Vec<AdmissibleGraph> {
    fn subsets(items: &[Vertex], k: usize) -> Vec<Vec<Vertex>> {
        if k == 0 {
            return vec![Vec::new()];
        }
        if items.len() < k {
            return Vec::new();
        }
        let mut out = Vec::new();
        for mut rest in subsets(&items[1..], k - 1) {
            rest.insert(0, items[0]);
            out.push(rest);
        }
        out.extend(subsets(&items[1..], k));
        out
    }
    fn go(k: usize, n: usize, m: usize, left: usize, cur: &mut Vec<(usize, Vertex)>, out: &mut Vec<AdmissibleGraph>) {
        if k > n {
            if left == 0 {
                out.push(AdmissibleGraph::new(n, m, cur.clone()).expect("admissible by construction"));
            }
            return;
        }
        let targets: Vec<Vertex> = (1..=n)
            .filter(|&j| j != k)
            .map(Vertex::First)
            .chain((1..=m).map(Vertex::Second))
            .collect();
        for size in 0..=left.min(targets.len()) {
            for s in subsets(&targets, size) {
                let before = cur.len();
                cur.extend(s.into_iter().map(|t| (k, t)));
                go(k + 1, n, m, left - size, cur, out);
                cur.truncate(before);
            }
        }
    }
    if n == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    go(1, n, m, edge_count, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// Labelings of one vertex's outgoing edges from a polyvector: for each
/// term `c θ_J` with `|J|` equal to the out-degree and each permutation σ,
/// edge `j` gets index `J[σ(j)]` with sign `ε(σ)`.
fn vertex_labelings<C: Coefficient>(alpha: &Multivector<C>, out_degree: usize) -> Vec<(Vec<usize>, bool, C)> {
    let perms = permutations(out_degree);
    let mut out = Vec::new();
    for (key, c) in alpha.terms() {
        if key.len() != out_degree {
            continue;
        }
        for (p, odd) in &perms {
            out.push((p.iter().map(|&i| key[i]).collect(), *odd, c.clone()));
        }
    }
    out
}

/// `B_Γ(α₁, …, α_n)`: the `m`-slot operator
/// `Σ_I Π_k D_{I(k)} α_k^I ⊗ Π_l D_{I(l̄)}`.
///
/// `front` holds `α₁ … α_{n−1}`, `last` is `α_n` and may be module-valued.
/// Only the component of `α_k` of degree `outdeg(k) − 1` contributes, so a
/// degree mismatch gives the zero operator.
pub fn b_gamma<C: Coefficient>(g: &AdmissibleGraph, front: &[&PolyVector], last: &Multivector<C>) -> Result<Polydiff<C>> {
    if front.len() + 1 != g.n {
        return Err(Error::Arity { expected: g.n, got: front.len() + 1 });
    }
    let dim = last.dim();
    if let Some(a) = front.iter().find(|a| a.dim() != dim) {
        return Err(Error::DimensionMismatch(dim, a.dim()));
    }
    let mut out = Polydiff::zero(last.ctx().clone());
    let front_labels: Vec<Vec<(Vec<usize>, bool, Poly)>> =
        front.iter().enumerate().map(|(k, a)| vertex_labelings(a, g.out_degree(k + 1))).collect();
    let last_labels = vertex_labelings(last, g.out_degree(g.n));
    if front_labels.iter().any(Vec::is_empty) || last_labels.is_empty() {
        return Ok(out);
    }
    // edge positions grouped by source, matching the sorted edge list
    let mut edge_of: Vec<Vec<usize>> = vec![Vec::new(); g.n + 1];
    for (e, &(s, _)) in g.edges.iter().enumerate() {
        edge_of[s].push(e);
    }
    let mut labels = vec![0usize; g.edges.len()];
    let mut choice = vec![0usize; g.n - 1];
    loop {
        let mut odd = false;
        for (k, &c) in choice.iter().enumerate() {
            let (idx, o, _) = &front_labels[k][c];
            odd ^= *o;
            for (j, &e) in edge_of[k + 1].iter().enumerate() {
                labels[e] = idx[j];
            }
        }
        for (idx, o, lc) in &last_labels {
            for (j, &e) in edge_of[g.n].iter().enumerate() {
                labels[e] = idx[j];
            }
            let odd = odd ^ *o;
            // derivatives landing on each vertex and slot
            let mut vert = vec![MultiIndex::zeros(dim); g.n + 1];
            let mut slot = vec![MultiIndex::zeros(dim); g.m];
            for (e, &(_, t)) in g.edges.iter().enumerate() {
                match t {
                    Vertex::First(k) => vert[k] = vert[k].with_incremented(labels[e]),
                    Vertex::Second(l) => slot[l - 1] = slot[l - 1].with_incremented(labels[e]),
                }
            }
            let mut prod = Poly::one(dim);
            for (k, &c) in choice.iter().enumerate() {
                prod = &prod * &front_labels[k][c].2.derive(&vert[k + 1]);
                if prod.is_zero() {
                    break;
                }
            }
            if prod.is_zero() {
                continue;
            }
            let coeff = lc.derive(&vert[g.n]).mul_poly(&prod);
            let coeff = if odd { coeff.scale(&-crate::algebra::rational::one()) } else { coeff };
            out.add_term(slot, coeff);
        }
        // odometer over the front vertices
        let mut k = 0;
        loop {
            if k == choice.len() {
                return Ok(out);
            }
            choice[k] += 1;
            if choice[k] < front_labels[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}
