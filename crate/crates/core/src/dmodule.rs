//! Left D-modules on ℝ^d presented as `O^r` with a flat connection, and
//! differential operators acting on them.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::One;

use crate::algebra::{MultiIndex, Poly, Rational};
use crate::error::{Error, Result};

/// `O^r` with connection matrices `A₁ … A_d`; `∂ᵢ` acts as `∂ᵢ + Aᵢ`.
///
/// Flatness `∂ᵢA_j − ∂_jAᵢ + [Aᵢ, A_j] = 0` is checked on construction.
#[derive(Clone, PartialEq, Eq)]
pub struct FlatModule {
    dim: usize,
    rank: usize,
    connection: Vec<Vec<Vec<Poly>>>,
}

pub type Matrix = Vec<Vec<Poly>>;

fn mat_mul(a: &Matrix, b: &Matrix, dim: usize) -> Matrix {
    let r = a.len();
    (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    let mut acc = Poly::zero(dim);
                    for k in 0..r {
                        acc.add_assign_ref(&(&a[i][k] * &b[k][j]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

impl FlatModule {
    pub fn new(dim: usize, rank: usize, connection: Vec<Matrix>) -> Result<Arc<Self>> {
        if connection.len() != dim {
            return Err(Error::Invalid(format!("expected {dim} connection matrices, got {}", connection.len())));
        }
        for a in &connection {
            if a.len() != rank || a.iter().any(|row| row.len() != rank) {
                return Err(Error::Invalid(format!("connection matrices must be {rank}x{rank}")));
            }
            for p in a.iter().flatten() {
                if p.dim() != dim {
                    return Err(Error::DimensionMismatch(dim, p.dim()));
                }
            }
        }
        let m = FlatModule { dim, rank, connection };
        if let Some((i, j)) = m.curvature_defect() {
            return Err(Error::NotFlat(i + 1, j + 1));
        }
        Ok(Arc::new(m))
    }

    /// The module `O^rank` with the trivial connection.
    pub fn trivial(dim: usize, rank: usize) -> Arc<Self> {
        let zero: Matrix = vec![vec![Poly::zero(dim); rank]; rank];
        Arc::new(FlatModule { dim, rank, connection: vec![zero; dim] })
    }

    /// First pair `(i, j)` with nonzero curvature, if any.
    pub fn curvature_defect(&self) -> Option<(usize, usize)> {
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let ai = &self.connection[i];
                let aj = &self.connection[j];
                let aiaj = mat_mul(ai, aj, self.dim);
                let ajai = mat_mul(aj, ai, self.dim);
                for r in 0..self.rank {
                    for c in 0..self.rank {
                        let f = &(&aj[r][c].partial(i) - &ai[r][c].partial(j)) + &(&aiaj[r][c] - &ajai[r][c]);
                        if !f.is_zero() {
                            return Some((i, j));
                        }
                    }
                }
            }
        }
        None
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn connection(&self) -> &[Matrix] {
        &self.connection
    }

    pub fn is_trivial(&self) -> bool {
        self.connection.iter().flatten().flatten().all(Poly::is_zero)
    }
}

impl fmt::Debug for FlatModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FlatModule(d={}, r={})", self.dim, self.rank)
    }
}

/// An element of a [`FlatModule`]: `r` polynomial entries.
#[derive(Clone)]
pub struct ModuleVec {
    module: Arc<FlatModule>,
    entries: Vec<Poly>,
}

impl PartialEq for ModuleVec {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries && same_module(&self.module, &other.module)
    }
}

pub fn same_module(a: &Arc<FlatModule>, b: &Arc<FlatModule>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl fmt::Debug for ModuleVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl ModuleVec {
    pub fn new(module: Arc<FlatModule>, entries: Vec<Poly>) -> Result<Self> {
        if entries.len() != module.rank {
            return Err(Error::Arity { expected: module.rank, got: entries.len() });
        }
        if let Some(p) = entries.iter().find(|p| p.dim() != module.dim) {
            return Err(Error::DimensionMismatch(module.dim, p.dim()));
        }
        Ok(ModuleVec { module, entries })
    }

    pub fn zero(module: Arc<FlatModule>) -> Self {
        let entries = vec![Poly::zero(module.dim); module.rank];
        ModuleVec { module, entries }
    }

    /// The basis vector `e_k` with constant entry 1.
    pub fn basis(module: Arc<FlatModule>, k: usize) -> Self {
        let mut v = Self::zero(module);
        v.entries[k] = Poly::one(v.module.dim);
        v
    }

    pub fn module(&self) -> &Arc<FlatModule> {
        &self.module
    }

    pub fn entries(&self) -> &[Poly] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    pub fn add_assign_ref(&mut self, other: &ModuleVec) {
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            a.add_assign_ref(b);
        }
    }

    pub fn scale(&self, c: &Rational) -> ModuleVec {
        ModuleVec { module: self.module.clone(), entries: self.entries.iter().map(|p| p.scale(c)).collect() }
    }

    pub fn mul_poly(&self, f: &Poly) -> ModuleVec {
        ModuleVec { module: self.module.clone(), entries: self.entries.iter().map(|p| p * f).collect() }
    }

    /// `∇ᵢ m = ∂ᵢ m + Aᵢ m`.
    pub fn nabla(&self, axis: usize) -> ModuleVec {
        let a = &self.module.connection[axis];
        let entries = (0..self.module.rank)
            .map(|r| {
                let mut acc = self.entries[r].partial(axis);
                for (c, e) in self.entries.iter().enumerate() {
                    if !a[r][c].is_zero() && !e.is_zero() {
                        acc.add_assign_ref(&(&a[r][c] * e));
                    }
                }
                acc
            })
            .collect();
        ModuleVec { module: self.module.clone(), entries }
    }

    /// `∇^α m`; the order of factors is irrelevant by flatness.
    pub fn nabla_multi(&self, alpha: &MultiIndex) -> ModuleVec {
        if self.module.is_trivial() {
            return ModuleVec {
                module: self.module.clone(),
                entries: self.entries.iter().map(|p| p.derive(alpha)).collect(),
            };
        }
        let mut out = self.clone();
        for axis in alpha.axes() {
            out = out.nabla(axis);
        }
        out
    }

    pub fn degree(&self) -> Option<u32> {
        self.entries.iter().filter_map(Poly::degree).max()
    }
}

/// `Σ_α p_α(x) ∂^α`, derivatives to the right.
#[derive(Clone, PartialEq, Eq)]
pub struct DiffOp {
    dim: usize,
    terms: BTreeMap<MultiIndex, Poly>,
}

impl fmt::Debug for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|(a, p)| format!("({p})d{a:?}")).collect();
        write!(f, "{}", if parts.is_empty() { "0".into() } else { parts.join(" + ") })
    }
}

impl DiffOp {
    pub fn zero(dim: usize) -> Self {
        DiffOp { dim, terms: BTreeMap::new() }
    }

    /// Multiplication by `f`.
    pub fn function(f: Poly) -> Self {
        let mut op = DiffOp::zero(f.dim());
        op.add_term(MultiIndex::zeros(f.dim()), f);
        op
    }

    /// `∂^α`
    pub fn partial(alpha: MultiIndex) -> Self {
        let dim = alpha.dim();
        let mut op = DiffOp::zero(dim);
        op.add_term(alpha, Poly::one(dim));
        op
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (MultiIndex, Poly)>) -> Self {
        let mut op = DiffOp::zero(dim);
        for (a, p) in terms {
            op.add_term(a, p);
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Poly)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, alpha: MultiIndex, p: Poly) {
        if p.is_zero() {
            return;
        }
        let slot = self.terms.entry(alpha.clone()).or_insert_with(|| Poly::zero(self.dim));
        slot.add_assign_ref(&p);
        if slot.is_zero() {
            self.terms.remove(&alpha);
        }
    }

    pub fn add(&self, other: &DiffOp) -> DiffOp {
        let mut out = self.clone();
        for (a, p) in &other.terms {
            out.add_term(a.clone(), p.clone());
        }
        out
    }

    /// `P ∘ Q` in normal form, using `∂^α q = Σ_{γ≤α} C(α,γ) (∂^γ q) ∂^{α−γ}`.
    pub fn compose(&self, other: &DiffOp) -> Result<DiffOp> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let mut out = DiffOp::zero(self.dim);
        for (alpha, p) in &self.terms {
            for (beta, q) in &other.terms {
                for (parts, c) in alpha.splits(2) {
                    let dq = q.derive(&parts[0]);
                    if dq.is_zero() {
                        continue;
                    }
                    let coeff = (p * &dq).scale(&Rational::from_integer(c.into()));
                    out.add_term(parts[1].add(beta), coeff);
                }
            }
        }
        Ok(out)
    }

    /// Iterated coproduct with `outputs` tensor factors (so `outputs = 2`
    /// is `Δ`). Coefficients sit in front of the first factor.
    pub fn coproduct(&self, outputs: usize) -> BTreeMap<Vec<MultiIndex>, Poly> {
        assert!(outputs >= 1);
        let mut out: BTreeMap<Vec<MultiIndex>, Poly> = BTreeMap::new();
        for (alpha, p) in &self.terms {
            for (parts, c) in alpha.splits(outputs) {
                let term = p.scale(&Rational::from_integer(c.into()));
                let slot = out.entry(parts).or_insert_with(|| Poly::zero(self.dim));
                slot.add_assign_ref(&term);
            }
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    pub fn apply(&self, f: &Poly) -> Poly {
        let mut acc = Poly::zero(self.dim);
        for (alpha, p) in &self.terms {
            acc.add_assign_ref(&(p * &f.derive(alpha)));
        }
        acc
    }

    pub fn act(&self, m: &ModuleVec) -> Result<ModuleVec> {
        if self.dim != m.module.dim {
            return Err(Error::DimensionMismatch(self.dim, m.module.dim));
        }
        let mut acc = ModuleVec::zero(m.module.clone());
        for (alpha, p) in &self.terms {
            acc.add_assign_ref(&m.nabla_multi(alpha).mul_poly(p));
        }
        Ok(acc)
    }
}

/// The identity operator.
pub fn unit_op(dim: usize) -> DiffOp {
    DiffOp::function(Poly::constant(dim, Rational::one()))
}
