//! Exact values multiplied by products of Monte-Carlo weights, kept factored.
//!
//! A [`Weighted<T>`] is a finite sum `Σ W_{Γ₁}⋯W_{Γ_k} · t` with exact `t`.
//! Identities that hold for every value of the weights stay exactly checkable;
//! numeric evaluation propagates the weights' standard errors to first order.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::algebra::rational::to_f64;
use crate::algebra::{Poly, Rational};
use crate::coefficient::Coefficient;
use crate::dmodule::ModuleVec;
use crate::graphs::AdmissibleGraph;
use crate::polydiff::Polydiff;
use crate::polyvector::Multivector;
use crate::weights::WeightEstimate;

/// Estimates referenced by [`Weighted`] monomials.
#[derive(Clone, Debug, Default)]
pub struct WeightTable {
    entries: Vec<(AdmissibleGraph, WeightEstimate)>,
    index: HashMap<String, usize>,
}

impl WeightTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, g: &AdmissibleGraph, est: WeightEstimate) -> usize {
        let h = g.hash();
        if let Some(&i) = self.index.get(&h) {
            return i;
        }
        self.entries.push((g.clone(), est));
        self.index.insert(h, self.entries.len() - 1);
        self.entries.len() - 1
    }

    pub fn lookup(&self, g: &AdmissibleGraph) -> Option<usize> {
        self.index.get(&g.hash()).copied()
    }

    pub fn get(&self, i: usize) -> &(AdmissibleGraph, WeightEstimate) {
        &self.entries[i]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(AdmissibleGraph, WeightEstimate)> {
        self.entries.iter()
    }
}

/// Sorted table indices, repeats allowed; empty for exact terms.
pub type Monomial = Vec<usize>;

fn merge(a: &[usize], b: &[usize]) -> Monomial {
    let mut out: Monomial = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out
}

/// Vector-space operations on exact values.
pub trait Linear: Clone {
    fn lin_add(&mut self, other: &Self);
    fn lin_scale(&self, c: &Rational) -> Self;
    fn lin_is_zero(&self) -> bool;
}

impl Linear for Poly {
    fn lin_add(&mut self, other: &Self) {
        self.add_assign_ref(other)
    }
    fn lin_scale(&self, c: &Rational) -> Self {
        self.scale(c)
    }
    fn lin_is_zero(&self) -> bool {
        self.is_zero()
    }
}

impl Linear for ModuleVec {
    fn lin_add(&mut self, other: &Self) {
        self.add_assign_ref(other)
    }
    fn lin_scale(&self, c: &Rational) -> Self {
        self.scale(c)
    }
    fn lin_is_zero(&self) -> bool {
        self.is_zero()
    }
}

impl<C: Coefficient> Linear for Polydiff<C> {
    fn lin_add(&mut self, other: &Self) {
        self.add_assign(other)
    }
    fn lin_scale(&self, c: &Rational) -> Self {
        self.scale(c)
    }
    fn lin_is_zero(&self) -> bool {
        self.is_zero()
    }
}

impl<C: Coefficient> Linear for Multivector<C> {
    fn lin_add(&mut self, other: &Self) {
        self.add_assign(other)
    }
    fn lin_scale(&self, c: &Rational) -> Self {
        self.scale(c)
    }
    fn lin_is_zero(&self) -> bool {
        self.is_zero()
    }
}

/// Exact values flattened to labelled rational coordinates.
pub trait Coordinates {
    fn coordinates(&self) -> Vec<(String, Rational)>;
}

impl Coordinates for Poly {
    fn coordinates(&self) -> Vec<(String, Rational)> {
        self.terms().map(|(e, c)| (format!("{:?}", e.as_slice()), c.clone())).collect()
    }
}

impl Coordinates for ModuleVec {
    fn coordinates(&self) -> Vec<(String, Rational)> {
        let mut out = Vec::new();
        for (k, p) in self.entries().iter().enumerate() {
            for (key, c) in p.coordinates() {
                out.push((format!("e{k}:{key}"), c));
            }
        }
        out
    }
}

impl<C: Coefficient + Coordinates> Coordinates for Polydiff<C> {
    fn coordinates(&self) -> Vec<(String, Rational)> {
        let mut out = Vec::new();
        for (slots, c) in self.terms() {
            let s: Vec<Vec<u32>> = slots.iter().map(|a| a.as_slice().to_vec()).collect();
            for (key, v) in c.coordinates() {
                out.push((format!("{s:?}|{key}"), v));
            }
        }
        out
    }
}

impl<C: Coefficient + Coordinates> Coordinates for Multivector<C> {
    fn coordinates(&self) -> Vec<(String, Rational)> {
        let mut out = Vec::new();
        for (idx, c) in self.terms() {
            for (key, v) in c.coordinates() {
                out.push((format!("{idx:?}|{key}"), v));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Weighted<T> {
    terms: BTreeMap<Monomial, T>,
}

impl<T: Linear> Default for Weighted<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Linear> Weighted<T> {
    pub fn zero() -> Self {
        Weighted { terms: BTreeMap::new() }
    }

    pub fn exact(t: T) -> Self {
        Self::monomial(Vec::new(), t)
    }

    pub fn monomial(mut mono: Monomial, t: T) -> Self {
        mono.sort_unstable();
        let mut out = Self::zero();
        out.add_term(mono, t);
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &T)> {
        self.terms.iter()
    }

    pub fn get(&self, mono: &[usize]) -> Option<&T> {
        self.terms.get(mono)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, mono: Monomial, t: T) {
        if t.lin_is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(v) => {
                v.lin_add(&t);
                if v.lin_is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, t);
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (m, t) in &other.terms {
            self.add_term(m.clone(), t.clone());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero();
        for (m, t) in &self.terms {
            out.add_term(m.clone(), t.lin_scale(c));
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::from_integer(1.into())))
    }

    pub fn map<U: Linear>(&self, f: impl Fn(&T) -> U) -> Weighted<U> {
        let mut out = Weighted::zero();
        for (m, t) in &self.terms {
            out.add_term(m.clone(), f(t));
        }
        out
    }

    pub fn try_map<U: Linear, E>(&self, f: impl Fn(&T) -> Result<U, E>) -> Result<Weighted<U>, E> {
        let mut out = Weighted::zero();
        for (m, t) in &self.terms {
            out.add_term(m.clone(), f(t)?);
        }
        Ok(out)
    }

    /// Bilinear extension of `f`; monomials multiply.
    pub fn combine<S: Linear, U: Linear, E>(
        &self,
        other: &Weighted<S>,
        f: impl Fn(&T, &S) -> Result<U, E>,
    ) -> Result<Weighted<U>, E> {
        let mut out = Weighted::zero();
        for (m1, a) in &self.terms {
            for (m2, b) in &other.terms {
                out.add_term(merge(m1, m2), f(a, b)?);
            }
        }
        Ok(out)
    }

    /// Trilinear extension of `f`.
    pub fn combine3<S: Linear, R: Linear, U: Linear, E>(
        &self,
        b: &Weighted<S>,
        c: &Weighted<R>,
        f: impl Fn(&T, &S, &R) -> Result<U, E>,
    ) -> Result<Weighted<U>, E> {
        let mut out = Weighted::zero();
        for (m1, x) in &self.terms {
            for (m2, y) in &b.terms {
                let m12 = merge(m1, m2);
                for (m3, z) in &c.terms {
                    out.add_term(merge(&m12, m3), f(x, y, z)?);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimatedCoordinate {
    pub key: String,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub coordinates: Vec<EstimatedCoordinate>,
    pub max_abs: f64,
    pub max_std_error: f64,
    /// Largest `|value| / std_error` (infinite if an exact coordinate is nonzero).
    pub max_sigma: f64,
}

/// Absolute slack for floating round-off in the weight products.
pub const ROUNDOFF: f64 = 1e-9;

impl Evaluation {
    /// Every coordinate satisfies `|value| <= k·σ + ROUNDOFF`.
    pub fn vanishes_within(&self, k: f64) -> bool {
        self.coordinates.iter().all(|c| c.value.abs() <= k * c.std_error + ROUNDOFF)
    }
}

impl<T: Linear + Coordinates> Weighted<T> {
    /// Numeric value of every coordinate with a first-order error estimate,
    /// treating distinct graph weights as independent.
    pub fn evaluate(&self, table: &WeightTable) -> Evaluation {
        let mut value: BTreeMap<String, f64> = BTreeMap::new();
        let mut grad: BTreeMap<String, BTreeMap<usize, f64>> = BTreeMap::new();
        for (mono, t) in &self.terms {
            let w: Vec<f64> = mono.iter().map(|&i| table.get(i).1.value).collect();
            let prod: f64 = w.iter().product();
            for (key, c) in t.coordinates() {
                let c = to_f64(&c);
                *value.entry(key.clone()).or_default() += c * prod;
                let g = grad.entry(key).or_default();
                for (pos, &i) in mono.iter().enumerate() {
                    let others: f64 = w.iter().enumerate().filter(|(j, _)| *j != pos).map(|(_, v)| v).product();
                    *g.entry(i).or_default() += c * others;
                }
            }
        }
        let mut coordinates = Vec::new();
        for (key, v) in value {
            let var: f64 = grad[&key].iter().map(|(&i, d)| (d * table.get(i).1.std_error).powi(2)).sum();
            coordinates.push(EstimatedCoordinate { key, value: v, std_error: var.sqrt() });
        }
        let max_abs = coordinates.iter().map(|c| c.value.abs()).fold(0.0, f64::max);
        let max_std_error = coordinates.iter().map(|c| c.std_error).fold(0.0, f64::max);
        let max_sigma = coordinates
            .iter()
            .map(|c| {
                if c.value.abs() <= ROUNDOFF {
                    0.0
                } else if c.std_error == 0.0 {
                    f64::INFINITY
                } else {
                    c.value.abs() / c.std_error
                }
            })
            .fold(0.0, f64::max);
        Evaluation { coordinates, max_abs, max_std_error, max_sigma }
    }
}
