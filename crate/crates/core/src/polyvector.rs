//! Polyvector fields on ℝ^d, with plain or module coefficients.
//!
//! A term `c · ∂_{j₀} ∧ … ∧ ∂_{j_k}` is stored under the strictly increasing
//! key `[j₀, …, j_k]` and has degree `k` (so functions have degree −1).
//! Computations treat `∂_j` as an odd variable `θ_j`.

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::{HSeries, Poly, Rational};
use crate::coefficient::Coefficient;
use crate::error::{Error, Result};

#[derive(Clone)]
pub struct Multivector<C: Coefficient> {
    ctx: C::Ctx,
    terms: BTreeMap<Vec<usize>, C>,
}

pub type PolyVector = Multivector<Poly>;
pub type PolyVectorM = Multivector<crate::dmodule::ModuleVec>;

impl<C: Coefficient> PartialEq for Multivector<C> {
    fn eq(&self, other: &Self) -> bool {
        C::ctx_eq(&self.ctx, &other.ctx) && self.terms == other.terms
    }
}

impl<C: Coefficient> fmt::Debug for Multivector<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| {
                let wedge: Vec<String> = k.iter().map(|j| format!("d{}", j + 1)).collect();
                format!("{c:?}*[{}]", wedge.join("^"))
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Sign and merged key of `θ_a ∧ θ_b`, or `None` if they share an index.
pub(crate) fn merge_sign(a: &[usize], b: &[usize]) -> Option<(Vec<usize>, bool)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut odd = false;
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            // b[j] jumps over the a.len() - i remaining entries of a
            if (a.len() - i) % 2 == 1 {
                odd = !odd;
            }
            out.push(b[j]);
            j += 1;
        } else {
            return None;
        }
    }
    Some((out, odd))
}

/// Sorts `idx` returning the permutation parity, or `None` on a repeat.
pub fn sort_with_sign(idx: &[usize]) -> Option<(Vec<usize>, bool)> {
    let mut v = idx.to_vec();
    let mut odd = false;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            odd = !odd;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, odd))
}

impl<C: Coefficient> Multivector<C> {
    pub fn zero(ctx: C::Ctx) -> Self {
        Multivector { ctx, terms: BTreeMap::new() }
    }

    /// A degree −1 element.
    pub fn scalar(c: C) -> Self {
        let mut v = Self::zero(c.ctx());
        v.add_term(Vec::new(), c);
        v
    }

    /// `c · ∂_{idx₀} ∧ …` for any index order; repeats give zero.
    pub fn term(ctx: C::Ctx, idx: &[usize], c: C) -> Self {
        let mut v = Self::zero(ctx);
        v.add_unsorted(idx, c);
        v
    }

    pub fn ctx(&self) -> &C::Ctx {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        C::ctx_dim(&self.ctx)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &C)> {
        self.terms.iter()
    }

    pub fn get(&self, idx: &[usize]) -> Option<&C> {
        self.terms.get(idx)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Degrees present, ascending.
    pub fn degrees(&self) -> Vec<i32> {
        let mut d: Vec<i32> = self.terms.keys().map(|k| k.len() as i32 - 1).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn homogeneous(&self, degree: i32) -> Self {
        Multivector {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().filter(|(k, _)| k.len() as i32 - 1 == degree).map(|(k, c)| (k.clone(), c.clone())).collect(),
        }
    }

    /// Adds `c` under an already increasing key.
    pub fn add_term(&mut self, key: Vec<usize>, c: C) {
        debug_assert!(key.windows(2).all(|w| w[0] < w[1]), "key must be strictly increasing");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign(&c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_unsorted(&mut self, idx: &[usize], c: C) {
        if let Some((key, odd)) = sort_with_sign(idx) {
            let c = if odd { c.scale(&-Rational::from_integer(1.into())) } else { c };
            self.add_term(key, c);
        }
    }

    fn add_signed(&mut self, key: Vec<usize>, c: C, negative: bool) {
        let c = if negative { c.scale(&-Rational::from_integer(1.into())) } else { c };
        self.add_term(key, c);
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (k, c) in &other.terms {
            self.add_term(k.clone(), c.clone());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.ctx.clone());
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v.scale(c));
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::from_integer(1.into()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn map_coeffs<D: Coefficient>(&self, ctx: D::Ctx, f: impl Fn(&C) -> D) -> Multivector<D> {
        let mut out = Multivector::zero(ctx);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), f(c));
        }
        out
    }

    fn check(&self, other_dim: usize) -> Result<()> {
        if self.dim() != other_dim {
            return Err(Error::DimensionMismatch(self.dim(), other_dim));
        }
        Ok(())
    }
}

impl PolyVector {
    /// `Σ π^{ij} ∂ᵢ ∧ ∂_j` over the listed `(i, j)` entries.
    pub fn bivector(dim: usize, entries: &[((usize, usize), Poly)]) -> Self {
        let mut out = Self::zero(dim);
        for ((i, j), p) in entries {
            out.add_unsorted(&[*i, *j], p.clone());
        }
        out
    }

    /// Coefficient of `∂_{idx}` for arbitrary index order, with the
    /// antisymmetric sign; zero on repeats.
    pub fn component(&self, idx: &[usize]) -> Poly {
        match sort_with_sign(idx) {
            None => Poly::zero(self.dim()),
            Some((key, odd)) => match self.terms.get(&key) {
                None => Poly::zero(self.dim()),
                Some(c) if odd => -c,
                Some(c) => c.clone(),
            },
        }
    }
}

/// `u ∧ v` with `u` plain; degree −1 terms of `u` act as scalars.
pub fn wedge<C: Coefficient>(u: &PolyVector, v: &Multivector<C>) -> Result<Multivector<C>> {
    u.check(v.dim())?;
    let mut out = Multivector::zero(v.ctx.clone());
    for (a, f) in &u.terms {
        for (b, c) in &v.terms {
            if let Some((key, odd)) = merge_sign(a, b) {
                out.add_signed(key, c.mul_poly(f), odd);
            }
        }
    }
    Ok(out)
}

fn remove_at(key: &[usize], pos: usize) -> Vec<usize> {
    let mut k = key.to_vec();
    k.remove(pos);
    k
}

/// The action `u ·_S t`; for `C = Poly` this is the Schouten bracket `[u, t]_S`.
///
/// On `t = θ_J ⊗ m` with `u` of degree `k` and `θ_J` of degree `l`:
/// `u·(θ_J⊗m) = [u, θ_J]⊗m + (−1)^{k(l+1)} θ_J ∧ Σᵢ (∂u/∂θᵢ)_right ⊗ ∇ᵢm`.
pub fn schouten_act<C: Coefficient>(u: &PolyVector, t: &Multivector<C>) -> Result<Multivector<C>> {
    u.check(t.dim())?;
    let mut out = Multivector::zero(t.ctx.clone());
    for (ki, a) in &u.terms {
        let k = ki.len() as i64 - 1;
        for (kj, m) in &t.terms {
            let l = kj.len() as i64 - 1;
            // [a θ_I, θ_J] = −Σ_{i∈J} (∂ᵢa) θ_I ∧ (∂θ_J/∂θᵢ)_left
            for (pos, &i) in kj.iter().enumerate() {
                let da = a.partial(i);
                if da.is_zero() {
                    continue;
                }
                let rest = remove_at(kj, pos);
                if let Some((key, odd)) = merge_sign(ki, &rest) {
                    let negative = odd ^ (pos % 2 == 1) ^ true;
                    out.add_signed(key, m.mul_poly(&da), negative);
                }
            }
            // (−1)^{k(l+1)} θ_J ∧ (∂(aθ_I)/∂θᵢ)_right ⊗ ∇ᵢ m
            let outer = (k * (l + 1)).rem_euclid(2) == 1;
            for (pos, &i) in ki.iter().enumerate() {
                let rest = remove_at(ki, pos);
                let right = (ki.len() - 1 - pos) % 2 == 1;
                if let Some((key, odd)) = merge_sign(kj, &rest) {
                    let nm = m.derive_axis(i).mul_poly(a);
                    out.add_signed(key, nm, outer ^ right ^ odd);
                }
            }
        }
    }
    Ok(out)
}

/// Schouten–Nijenhuis bracket.
pub fn schouten(u: &PolyVector, v: &PolyVector) -> Result<PolyVector> {
    schouten_act(u, v)
}

/// `π_h ·_S y` for h-series `π_h` and `y`.
pub fn poisson_differential<C: Coefficient>(
    pi_h: &HSeries<PolyVector>,
    y: &HSeries<Multivector<C>>,
) -> Result<HSeries<Multivector<C>>> {
    let ctx = y.coeff(0).ctx.clone();
    for p in pi_h.coeffs() {
        p.check(C::ctx_dim(&ctx))?;
    }
    pi_h.convolve(
        y,
        Multivector::zero(ctx),
        |p, t| schouten_act(p, t).expect("dimensions checked above"),
        |acc, v| acc.add_assign(&v),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::int;
    use crate::dmodule::{FlatModule, ModuleVec};
    use crate::random::{random_flat_module, random_module_vec, random_multivector, random_poly};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn x(dim: usize, i: usize) -> Poly {
        Poly::var(dim, i)
    }

    fn vf(dim: usize, i: usize, c: Poly) -> PolyVector {
        PolyVector::term(dim, &[i], c)
    }

    fn sign(k: i32, l: i32) -> Rational {
        if (k * l).rem_euclid(2) == 0 {
            int(1)
        } else {
            int(-1)
        }
    }

    #[test]
    fn bracket_examples() {
        let d1 = vf(2, 0, Poly::one(2));
        assert_eq!(schouten(&d1, &PolyVector::scalar(x(2, 0))).unwrap(), PolyVector::scalar(Poly::one(2)));
        let f = PolyVector::scalar(x(2, 0));
        let g = PolyVector::scalar(x(2, 1));
        assert!(schouten(&f, &g).unwrap().is_zero());
        // [x₂∂₁, x₁∂₂] = x₂∂₂ − x₁∂₁
        let u = vf(2, 0, x(2, 1));
        let v = vf(2, 1, x(2, 0));
        let expect = vf(2, 1, x(2, 1)).sub(&vf(2, 0, x(2, 0)));
        assert_eq!(schouten(&u, &v).unwrap(), expect);
    }

    #[test]
    fn wedge_examples() {
        let d1 = vf(2, 0, Poly::one(2));
        let d2 = vf(2, 1, Poly::one(2));
        let w = wedge(&d1, &d2).unwrap();
        assert_eq!(w.get(&[0, 1]), Some(&Poly::one(2)));
        assert_eq!(wedge(&d2, &d1).unwrap(), w.neg());
    }

    #[test]
    fn action_examples() {
        let m = FlatModule::trivial(2, 1);
        let m0 = ModuleVec::basis(m.clone(), 0);
        let f = PolyVector::scalar(x(2, 0));
        assert!(schouten_act(&f, &PolyVectorM::scalar(m0.clone())).unwrap().is_zero());
        // (∂₁∧∂₂)·m = ∂₁⊗∂₂m − ∂₂⊗∂₁m
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let fm = random_flat_module(&mut rng, 2, 2, 1);
        let n = random_module_vec(&mut rng, &fm, 2);
        let pi = PolyVector::term(2, &[0, 1], Poly::one(2));
        let got = schouten_act(&pi, &PolyVectorM::scalar(n.clone())).unwrap();
        let mut expect = PolyVectorM::zero(fm.clone());
        expect.add_term(vec![0], n.nabla(1));
        expect.add_term(vec![1], n.nabla(0).scale(&int(-1)));
        assert_eq!(got, expect);
        // ∂₁ · (x₁ m₀) = m₀ + x₁ ∂₁m₀ for M = O
        let d1 = vf(2, 0, Poly::one(2));
        let t = PolyVectorM::scalar(m0.mul_poly(&x(2, 0)));
        let got = schouten_act(&d1, &t).unwrap();
        assert_eq!(got, PolyVectorM::scalar(m0));
    }

    fn rand_pv(rng: &mut ChaCha8Rng, dim: usize) -> (PolyVector, i32) {
        let deg = rng.gen_range(-1..=2.min(dim as i32 - 1));
        let terms = rng.gen_range(1..=2);
        (random_multivector(rng, &dim, deg, terms, |r| random_poly(r, dim, 2, 2)), deg)
    }

    #[test]
    fn graded_antisymmetry_and_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let dim = rng.gen_range(1..=3);
            let (u, k) = rand_pv(&mut rng, dim);
            let (v, l) = rand_pv(&mut rng, dim);
            let (w, _) = rand_pv(&mut rng, dim);
            let uv = schouten(&u, &v).unwrap();
            let vu = schouten(&v, &u).unwrap();
            assert_eq!(uv, vu.scale(&-sign(k, l)));
            // [u,[v,w]] = [[u,v],w] + (−1)^{kl}[v,[u,w]]
            let lhs = schouten(&u, &schouten(&v, &w).unwrap()).unwrap();
            let rhs = schouten(&uv, &w).unwrap().add(&schouten(&v, &schouten(&u, &w).unwrap()).unwrap().scale(&sign(k, l)));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn bracket_leibniz_axiom() {
        // [u, v∧w] = [u,v]∧w + (−1)^{k(l+1)} v∧[u,w]
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..60 {
            let (u, k) = rand_pv(&mut rng, 3);
            let (v, l) = rand_pv(&mut rng, 3);
            let (w, _) = rand_pv(&mut rng, 3);
            let lhs = schouten(&u, &wedge(&v, &w).unwrap()).unwrap();
            let a = wedge(&schouten(&u, &v).unwrap(), &w).unwrap();
            let b = wedge(&v, &schouten(&u, &w).unwrap()).unwrap().scale(&sign(k, l + 1));
            assert_eq!(lhs, a.add(&b));
        }
    }

    #[test]
    fn module_action_law_and_leibniz() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..40 {
            let dim = rng.gen_range(2..=3);
            let module = random_flat_module(&mut rng, dim, 2, 1);
            let (u, k) = rand_pv(&mut rng, dim);
            let (v, l) = rand_pv(&mut rng, dim);
            let tdeg = rng.gen_range(-1..=1);
            let t: PolyVectorM = random_multivector(&mut rng, &module, tdeg, 2, |r| random_module_vec(r, &module, 1));
            let lhs = schouten_act(&schouten(&u, &v).unwrap(), &t).unwrap();
            let rhs = schouten_act(&u, &schouten_act(&v, &t).unwrap())
                .unwrap()
                .sub(&schouten_act(&v, &schouten_act(&u, &t).unwrap()).unwrap().scale(&sign(k, l)));
            assert_eq!(lhs, rhs);
            let lhs = schouten_act(&u, &wedge(&v, &t).unwrap()).unwrap();
            let rhs = wedge(&schouten(&u, &v).unwrap(), &t)
                .unwrap()
                .add(&wedge(&v, &schouten_act(&u, &t).unwrap()).unwrap().scale(&sign(k, l + 1)));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn poisson_differential_squares_to_zero() {
        // linear Poisson structure on so(3)*
        let dim = 3;
        let pi = PolyVector::bivector(
            dim,
            &[((0, 1), x(dim, 2)), ((1, 2), x(dim, 0)), ((2, 0), x(dim, 1))],
        );
        assert!(schouten(&pi, &pi).unwrap().is_zero());
        let pi_h = HSeries::from_coeffs(vec![PolyVector::zero(dim), pi, PolyVector::zero(dim)]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let module = FlatModule::trivial(dim, 1);
        let y0: PolyVectorM = random_multivector(&mut rng, &module, 0, 2, |r| random_module_vec(r, &module, 2));
        let y = HSeries::from_coeffs(vec![y0.clone(), y0, PolyVectorM::zero(module.clone())]);
        let once = poisson_differential(&pi_h, &y).unwrap();
        let twice = poisson_differential(&pi_h, &once).unwrap();
        assert!(twice.coeffs().iter().all(Multivector::is_zero));
        assert!(!once.coeff(1).is_zero());
    }
}
