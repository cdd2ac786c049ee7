use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::multi_index::MultiIndex;
use super::rational::{format_rational, parse_rational, Rational};
use crate::error::{Error, Result};

/// Sparse polynomial in `x₁ … x_d` with exact rational coefficients.
///
/// Zero coefficients are never stored, so structural equality is
/// mathematical equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    dim: usize,
    terms: BTreeMap<MultiIndex, Rational>,
}

impl Poly {
    pub fn zero(dim: usize) -> Self {
        Poly { dim, terms: BTreeMap::new() }
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Rational::one())
    }

    pub fn constant(dim: usize, c: Rational) -> Self {
        Self::monomial(MultiIndex::zeros(dim), c)
    }

    /// The coordinate function `x_{axis+1}` (axes are 0-based).
    pub fn var(dim: usize, axis: usize) -> Self {
        Self::monomial(MultiIndex::unit(dim, axis), Rational::one())
    }

    pub fn monomial(exp: MultiIndex, c: Rational) -> Self {
        let dim = exp.dim();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        Poly { dim, terms }
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (MultiIndex, Rational)>) -> Result<Self> {
        let mut p = Poly::zero(dim);
        for (e, c) in terms {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch(dim, e.dim()));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exp: &MultiIndex) -> Rational {
        self.terms.get(exp).cloned().unwrap_or_else(Rational::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.total()).max()
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&MultiIndex::zeros(self.dim))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.is_zero())
    }

    /// Adds `c·x^exp` in place.
    pub fn add_term(&mut self, exp: MultiIndex, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign_ref(&mut self, other: &Poly) {
        debug_assert_eq!(self.dim, other.dim);
        for (e, c) in &other.terms {
            self.add_term(e.clone(), c.clone());
        }
    }

    /// `self += c · other`
    pub fn add_scaled(&mut self, other: &Poly, c: &Rational) {
        if c.is_zero() {
            return;
        }
        for (e, v) in &other.terms {
            self.add_term(e.clone(), v * c);
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.dim);
        }
        Poly { dim: self.dim, terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect() }
    }

    pub fn try_mul(&self, other: &Poly) -> Result<Poly> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.add(eb), ca * cb);
            }
        }
        out
    }

    pub fn try_partial(&self, axis: usize) -> Result<Poly> {
        if axis >= self.dim {
            return Err(Error::AxisOutOfRange { axis, dim: self.dim });
        }
        Ok(self.partial(axis))
    }

    /// `∂p/∂x_{axis+1}`. Panics if `axis` is out of range; use
    /// [`Poly::try_partial`] for checked access.
    pub fn partial(&self, axis: usize) -> Poly {
        assert!(axis < self.dim, "axis {axis} out of range for dimension {}", self.dim);
        let mut out = Poly::zero(self.dim);
        for (e, c) in &self.terms {
            let k = e.get(axis);
            if k == 0 {
                continue;
            }
            let mut exps = e.as_slice().to_vec();
            exps[axis] -= 1;
            out.add_term(MultiIndex::from_slice(&exps), c * Rational::from_integer(k.into()));
        }
        out
    }

    /// `∂^α p`.
    pub fn derive(&self, alpha: &MultiIndex) -> Poly {
        let mut out = Poly::zero(self.dim);
        for (e, c) in &self.terms {
            let Some(rest) = e.checked_sub(alpha) else { continue };
            // falling factorial Π e_i! / (e_i - α_i)!
            let mut f = c.clone();
            for (ei, ai) in e.as_slice().iter().zip(alpha.as_slice()) {
                for k in (ei - ai + 1)..=*ei {
                    f *= Rational::from_integer(k.into());
                }
            }
            out.add_term(rest, f);
        }
        out
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let m: f64 = e.as_slice().iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product();
                super::rational::to_f64(c) * m
            })
            .sum()
    }

    /// Largest absolute coefficient, `0` for the zero polynomial.
    pub fn max_abs_coeff(&self) -> Rational {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(Rational::zero)
    }

    /// Drops every term of total degree above `deg`.
    pub fn truncate_degree(&self, deg: u32) -> Poly {
        Poly {
            dim: self.dim,
            terms: self.terms.iter().filter(|(e, _)| e.total() <= deg).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    /// Parses text such as `x1^2*x2 - 3/2*x2 + 1`. Variables are `x1 … xd`.
    pub fn parse(dim: usize, src: &str) -> Result<Poly> {
        let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut out = Poly::zero(dim);
        // split into signed terms
        let mut terms = Vec::new();
        let mut cur = String::new();
        for (i, ch) in s.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with('^') {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        for t in terms {
            let (neg, body) = match t.strip_prefix('-') {
                Some(b) => (true, b),
                None => (false, t.strip_prefix('+').unwrap_or(&t)),
            };
            if body.is_empty() {
                return Err(Error::Parse(format!("dangling sign in `{src}`")));
            }
            let mut coef = Rational::one();
            let mut exps = vec![0u32; dim];
            for factor in body.split('*') {
                if let Some(var) = factor.strip_prefix('x') {
                    let (idx, pow) = match var.split_once('^') {
                        Some((i, p)) => (i, p.parse::<u32>().map_err(|_| Error::Parse(format!("bad exponent in `{factor}`")))?),
                        None => (var, 1),
                    };
                    let idx: usize = idx.parse().map_err(|_| Error::Parse(format!("bad variable `{factor}`")))?;
                    if idx == 0 || idx > dim {
                        return Err(Error::Parse(format!("variable `{factor}` outside x1..x{dim}")));
                    }
                    exps[idx - 1] += pow;
                } else {
                    coef *= parse_rational(factor)?;
                }
            }
            if neg {
                coef = -coef;
            }
            out.add_term(MultiIndex::from_slice(&exps), coef);
        }
        Ok(out)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = self.clone();
        out.add_scaled(rhs, &-Rational::one());
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        self.mul_unchecked(rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rational::one())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mut factors = Vec::new();
            if !a.is_one() || e.is_zero() {
                factors.push(format_rational(&a));
            }
            for (i, &p) in e.as_slice().iter().enumerate() {
                match p {
                    0 => {}
                    1 => factors.push(format!("x{}", i + 1)),
                    _ => factors.push(format!("x{}^{p}", i + 1)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({self})", self.dim)
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    exp: Vec<u32>,
    coef: String,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    dim: usize,
    terms: Vec<TermJson>,
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyJson {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermJson { exp: e.as_slice().to_vec(), coef: format_rational(c) })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = PolyJson::deserialize(d)?;
        let mut p = Poly::zero(raw.dim);
        for t in raw.terms {
            if t.exp.len() != raw.dim {
                return Err(D::Error::custom(format!("exponent length {} != dim {}", t.exp.len(), raw.dim)));
            }
            let c = parse_rational(&t.coef).map_err(D::Error::custom)?;
            p.add_term(MultiIndex::from_slice(&t.exp), c);
        }
        Ok(p)
    }
}
