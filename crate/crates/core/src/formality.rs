//! Taylor coefficients `U^{[n]}`, `V^{[n]}`, the star product of a Poisson
//! bivector, its bimodule actions on a flat module, the twisted morphism and
//! the deformed Hochschild differential.
//!
//! Every numeric object is a [`Weighted`] value: exact operators multiplied
//! by graph weights that are estimated once and shared through a
//! [`WeightTable`].

use std::iter;

use serde::Serialize;

use crate::algebra::rational::{factorial, one};
use crate::algebra::{HSeries, MultiIndex, Poly, Rational};
use crate::coefficient::Coefficient;
use crate::dmodule::ModuleVec;
use crate::error::{Error, Result};
use crate::graphs::{b_gamma, enumerate_graphs, AdmissibleGraph};
use crate::polydiff::{act_g, hochschild_diff_m, insert_all, PolyDiffOp, Polydiff};
use crate::polyvector::{schouten, schouten_act, Multivector, PolyVector};
use crate::weighted::{Coordinates, Evaluation, Linear, WeightTable, Weighted};
use crate::weights::{weight, WeightCache, WeightEstimate};

pub type WSeries<T> = HSeries<Weighted<T>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { samples: 200_000, seed: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SkippedGraph {
    pub hash: String,
    pub reason: String,
}

/// Supplies weights for graph sums and records what could not be weighted.
pub struct WeightSource {
    mc: McConfig,
    cache: Option<WeightCache>,
    table: WeightTable,
    skipped: Vec<SkippedGraph>,
}

impl WeightSource {
    pub fn new(mc: McConfig) -> Self {
        WeightSource { mc, cache: None, table: WeightTable::new(), skipped: Vec::new() }
    }

    pub fn with_cache(mc: McConfig, cache: WeightCache) -> Self {
        WeightSource { cache: Some(cache), ..Self::new(mc) }
    }

    pub fn mc(&self) -> McConfig {
        self.mc
    }

    pub fn table(&self) -> &WeightTable {
        &self.table
    }

    pub fn skipped(&self) -> &[SkippedGraph] {
        &self.skipped
    }

    /// Table index of `W_Γ`, or `None` when the weight is zero or unavailable.
    ///
    /// One-vertex graphs with at most one ground vertex have weight 1, the
    /// normalization under which `U^{[1]}` is the HKR map. Other graphs need
    /// two to four ground vertices; the rest are recorded as skipped.
    pub fn weight_index(&mut self, g: &AdmissibleGraph) -> Result<Option<usize>> {
        if let Some(i) = self.table.lookup(g) {
            return Ok(Some(i));
        }
        if !g.relevance().relevant {
            return Ok(None);
        }
        if g.n() == 1 && g.m() <= 1 {
            return Ok(Some(self.table.intern(g, WeightEstimate::exact(1.0))));
        }
        if g.m() < 2 || g.m() > 4 {
            let reason = format!("no gauge for {} ground vertices", g.m());
            if !self.skipped.iter().any(|s| s.hash == g.hash()) {
                self.skipped.push(SkippedGraph { hash: g.hash(), reason });
            }
            return Ok(None);
        }
        let est = weight(g, self.mc.samples, self.mc.seed, self.cache.as_mut())?;
        Ok(Some(self.table.intern(g, est)))
    }
}

fn cartesian(choices: &[Vec<i32>]) -> Vec<Vec<i32>> {
    choices.iter().fold(vec![Vec::new()], |acc, opts| {
        acc.iter().flat_map(|p| opts.iter().map(move |&o| p.iter().copied().chain(iter::once(o)).collect())).collect()
    })
}

/// `Σ_Γ W_Γ B_Γ(α₁, …, α_{n−1}, last)` over all graphs whose out-degrees
/// match the argument degrees. `last` may be module-valued.
pub fn taylor<C: Coefficient>(
    front: &[&PolyVector],
    last: &Multivector<C>,
    src: &mut WeightSource,
) -> Result<Weighted<Polydiff<C>>> {
    let n = front.len() + 1;
    let choices: Vec<Vec<i32>> = front.iter().map(|a| a.degrees()).chain(iter::once(last.degrees())).collect();
    let mut out = Weighted::zero();
    for degs in cartesian(&choices) {
        let edges: i64 = degs.iter().map(|&d| d as i64 + 1).sum();
        let m = edges + 2 - 2 * n as i64;
        if m < 0 {
            continue;
        }
        for g in enumerate_graphs(n, m as usize, edges as usize) {
            if (1..=n).any(|k| g.out_degree(k) as i64 != degs[k - 1] as i64 + 1) {
                continue;
            }
            let b = b_gamma(&g, front, last)?;
            if b.is_zero() {
                continue;
            }
            if let Some(i) = src.weight_index(&g)? {
                // unit weights of the HKR corollas stay exact
                let mono = if src.table().get(i).1 == WeightEstimate::exact(1.0) { Vec::new() } else { vec![i] };
                out.add_term(mono, b);
            }
        }
    }
    Ok(out)
}

/// `U^{[n]}(α₁, …, α_n)`.
pub fn taylor_u(args: &[&PolyVector], src: &mut WeightSource) -> Result<Weighted<PolyDiffOp>> {
    let (last, front) = args.split_last().ok_or(Error::Arity { expected: 1, got: 0 })?;
    taylor(front, *last, src)
}

/// `V^{[n]}(γ₁, …, γ_n, ν) = U^{[n+1]}(γ₁, …, γ_n, ν)` with module-valued `ν`.
pub fn taylor_v<C: Coefficient>(
    front: &[&PolyVector],
    last: &Multivector<C>,
    src: &mut WeightSource,
) -> Result<Weighted<Polydiff<C>>> {
    taylor(front, last, src)
}

/// A bivector with `[π, π] = 0`, checked exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonInput {
    pi: PolyVector,
}

impl PoissonInput {
    pub fn new(pi: PolyVector) -> Result<Self> {
        if pi.degrees().iter().any(|&d| d != 1) {
            return Err(Error::Invalid("a Poisson structure is a bivector".into()));
        }
        if !schouten(&pi, &pi)?.is_zero() {
            return Err(Error::NotPoisson);
        }
        Ok(PoissonInput { pi })
    }

    pub fn pi(&self) -> &PolyVector {
        &self.pi
    }

    pub fn dim(&self) -> usize {
        self.pi.dim()
    }
}

/// `Π_h = μ + Σ_{n ≥ 1} hⁿ/n! · U^{[n]}(π, …, π)` up to `h^cap`.
#[derive(Clone, Debug)]
pub struct StarProduct {
    dim: usize,
    coeffs: Vec<Weighted<PolyDiffOp>>,
    table: WeightTable,
    skipped: Vec<SkippedGraph>,
    mc: McConfig,
}

pub fn build_star(pi: &PoissonInput, cap: usize, src: &mut WeightSource) -> Result<StarProduct> {
    let dim = pi.dim();
    let mut coeffs = vec![Weighted::exact(PolyDiffOp::mu(dim))];
    for n in 1..=cap {
        let args = vec![pi.pi(); n];
        let u = taylor_u(&args, src)?;
        coeffs.push(u.scale(&(one() / factorial(n as u32))));
    }
    Ok(StarProduct { dim, coeffs, table: src.table().clone(), skipped: src.skipped().to_vec(), mc: src.mc() })
}

fn exact_series<T: Linear>(x: T, cap: usize) -> WSeries<T> {
    let mut s = HSeries::filled(cap, Weighted::zero());
    *s.coeff_mut(0) = Weighted::exact(x);
    s
}

fn series_sub<T: Linear>(a: &WSeries<T>, b: &WSeries<T>) -> WSeries<T> {
    HSeries::from_coeffs(a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| x.sub(y)).collect())
}

/// `Σ_{α,β} c ∂^α a · ∇^β m` for a bidifferential `B = Σ c ∂^α ⊗ ∂^β`.
pub fn apply_left(b: &PolyDiffOp, a: &Poly, m: &ModuleVec) -> Result<ModuleVec> {
    let mut out = ModuleVec::zero(m.module().clone());
    for (key, c) in b.terms() {
        let [alpha, beta] = key.as_slice() else {
            return Err(Error::Arity { expected: 2, got: key.len() });
        };
        out.add_assign_ref(&m.nabla_multi(beta).mul_poly(&(c * &a.derive(alpha))));
    }
    Ok(out)
}

/// `Σ_{α,β} c ∇^α m · ∂^β a`.
pub fn apply_right(b: &PolyDiffOp, m: &ModuleVec, a: &Poly) -> Result<ModuleVec> {
    let mut out = ModuleVec::zero(m.module().clone());
    for (key, c) in b.terms() {
        let [alpha, beta] = key.as_slice() else {
            return Err(Error::Arity { expected: 2, got: key.len() });
        };
        out.add_assign_ref(&m.nabla_multi(alpha).mul_poly(&(c * &a.derive(beta))));
    }
    Ok(out)
}

impl StarProduct {
    pub fn cap(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `B_k`, the coefficient of `h^k`; `B_0 = μ`.
    pub fn coeff(&self, k: usize) -> &Weighted<PolyDiffOp> {
        &self.coeffs[k]
    }

    pub fn table(&self) -> &WeightTable {
        &self.table
    }

    pub fn skipped(&self) -> &[SkippedGraph] {
        &self.skipped
    }

    pub fn mc(&self) -> McConfig {
        self.mc
    }

    fn check_cap(&self, cap: usize) -> Result<()> {
        if cap != self.cap() {
            return Err(Error::CapMismatch(self.cap(), cap));
        }
        Ok(())
    }

    fn product<X: Linear, Y: Linear, Z: Linear>(
        &self,
        a: &WSeries<X>,
        b: &WSeries<Y>,
        f: impl Fn(&PolyDiffOp, &X, &Y) -> Result<Z>,
    ) -> Result<WSeries<Z>> {
        self.check_cap(a.cap())?;
        self.check_cap(b.cap())?;
        let cap = self.cap();
        let mut out = HSeries::filled(cap, Weighted::zero());
        for i in 0..=cap {
            for j in 0..=cap - i {
                for l in 0..=cap - i - j {
                    let t = self.coeffs[i].combine3(a.coeff(j), b.coeff(l), &f)?;
                    out.coeff_mut(i + j + l).add_assign(&t);
                }
            }
        }
        Ok(out)
    }

    pub fn lift<T: Linear>(&self, x: T) -> WSeries<T> {
        exact_series(x, self.cap())
    }

    /// `f *_h g` on series arguments.
    pub fn star(&self, f: &WSeries<Poly>, g: &WSeries<Poly>) -> Result<WSeries<Poly>> {
        self.product(f, g, |b, x, y| crate::polydiff::apply(b, &[x.clone(), y.clone()]))
    }

    pub fn star_apply(&self, f: &Poly, g: &Poly) -> Result<WSeries<Poly>> {
        self.star(&self.lift(f.clone()), &self.lift(g.clone()))
    }

    /// `a * m = a·m + Σ hⁱ Bᵢ(a, −)·m`.
    pub fn star_left(&self, a: &WSeries<Poly>, m: &WSeries<ModuleVec>) -> Result<WSeries<ModuleVec>> {
        self.product(a, m, apply_left)
    }

    /// `m * a = a·m + Σ hⁱ Bᵢ(−, a)·m`.
    pub fn star_right(&self, m: &WSeries<ModuleVec>, a: &WSeries<Poly>) -> Result<WSeries<ModuleVec>> {
        self.product(m, a, apply_right)
    }

    /// `t₁ ⊔_Π t₂`: slots concatenated, values multiplied by `*_h`.
    pub fn cup_pi<C: Coefficient>(
        &self,
        t1: &WSeries<PolyDiffOp>,
        t2: &WSeries<Polydiff<C>>,
    ) -> Result<WSeries<Polydiff<C>>> {
        self.product(t1, t2, |b, x, y| insert_all(b, &[x], y))
    }

    /// `β(λ) = (−1)^q Π_h ·_G λ` on cochains of degree `q`, the Hochschild
    /// differential of `M[[h]]` as a bimodule under `*_h`.
    pub fn beta<C: Coefficient>(&self, lambda: &WSeries<Polydiff<C>>) -> Result<WSeries<Polydiff<C>>> {
        self.check_cap(lambda.cap())?;
        let cap = self.cap();
        let mut out = HSeries::filled(cap, Weighted::zero());
        for i in 0..=cap {
            for j in 0..=cap - i {
                let t = self.coeffs[i].combine(lambda.coeff(j), |b, l| {
                    let mut acc = Polydiff::zero(l.ctx().clone());
                    for q in l.degrees() {
                        let part = act_g(b, &l.homogeneous(q))?;
                        acc.add_assign(&if q.rem_euclid(2) == 1 { part.neg() } else { part });
                    }
                    Ok::<_, Error>(acc)
                })?;
                out.coeff_mut(i + j).add_assign(&t);
            }
        }
        Ok(out)
    }
}

/// Per-order numeric summary of a series that should vanish.
#[derive(Clone, Debug, Serialize)]
pub struct DefectReport {
    pub orders: Vec<OrderDefect>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderDefect {
    pub h_order: usize,
    /// The factored expression is identically zero.
    pub exact_zero: bool,
    pub evaluation: Evaluation,
}

impl DefectReport {
    pub fn new<T: Linear + Coordinates>(series: &WSeries<T>, table: &WeightTable) -> Self {
        let orders = series
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, w)| OrderDefect { h_order: k, exact_zero: w.is_zero(), evaluation: w.evaluate(table) })
            .collect();
        DefectReport { orders }
    }

    pub fn order(&self, k: usize) -> &OrderDefect {
        &self.orders[k]
    }

    /// Every order vanishes within `k` standard errors.
    pub fn within(&self, k: f64) -> bool {
        self.orders.iter().all(|o| o.evaluation.vanishes_within(k))
    }
}

/// `(f*g)*k − f*(g*k)` per order.
pub fn assoc_defect(s: &StarProduct, f: &Poly, g: &Poly, k: &Poly) -> Result<DefectReport> {
    let (f, g, k) = (s.lift(f.clone()), s.lift(g.clone()), s.lift(k.clone()));
    let lhs = s.star(&s.star(&f, &g)?, &k)?;
    let rhs = s.star(&f, &s.star(&g, &k)?)?;
    Ok(DefectReport::new(&series_sub(&lhs, &rhs), s.table()))
}

#[derive(Clone, Debug, Serialize)]
pub struct BimoduleDefect {
    /// `(a*b)*m − a*(b*m)`.
    pub left: DefectReport,
    /// `(a*m)*b − a*(m*b)`.
    pub middle: DefectReport,
    /// `(m*a)*b − m*(a*b)`.
    pub right: DefectReport,
}

impl BimoduleDefect {
    pub fn within(&self, k: f64) -> bool {
        self.left.within(k) && self.middle.within(k) && self.right.within(k)
    }
}

pub fn bimodule_defect(s: &StarProduct, a: &Poly, b: &Poly, m: &ModuleVec) -> Result<BimoduleDefect> {
    let (a, b, m) = (s.lift(a.clone()), s.lift(b.clone()), s.lift(m.clone()));
    let left = series_sub(&s.star_left(&s.star(&a, &b)?, &m)?, &s.star_left(&a, &s.star_left(&b, &m)?)?);
    let middle = series_sub(&s.star_right(&s.star_left(&a, &m)?, &b)?, &s.star_left(&a, &s.star_right(&m, &b)?)?);
    let right = series_sub(&s.star_right(&s.star_right(&m, &a)?, &b)?, &s.star_right(&m, &s.star(&a, &b)?)?);
    Ok(BimoduleDefect {
        left: DefectReport::new(&left, s.table()),
        middle: DefectReport::new(&middle, s.table()),
        right: DefectReport::new(&right, s.table()),
    })
}

/// `(V_M)′_π(y) = Σ_p hᵖ/p! · V^{[p]}(π, …, π, y)` up to `h^cap`.
pub fn twisted_morphism<C: Coefficient>(
    pi: &PoissonInput,
    y: &Multivector<C>,
    cap: usize,
    src: &mut WeightSource,
) -> Result<WSeries<Polydiff<C>>> {
    let mut coeffs = Vec::with_capacity(cap + 1);
    for p in 0..=cap {
        let front = vec![pi.pi(); p];
        coeffs.push(taylor_v(&front, y, src)?.scale(&(one() / factorial(p as u32))));
    }
    Ok(HSeries::from_coeffs(coeffs))
}

/// The three pieces of the chain-map identity at order `h¹`.
#[derive(Clone, Debug)]
pub struct TwistedResidual<C: Coefficient> {
    /// `V^{[0]}(π ·_S y)`.
    pub image_of_bracket: Weighted<Polydiff<C>>,
    /// `∂_M V^{[1]}(π, y)`.
    pub boundary: Weighted<Polydiff<C>>,
    /// `U^{[1]}(π) ·_G V^{[0]}(y)`.
    pub action: Weighted<Polydiff<C>>,
    /// `V^{[0]}(π ·_S y) + ∂_M V^{[1]}(π, y) + U^{[1]}(π) ·_G V^{[0]}(y)`.
    pub residual: Weighted<Polydiff<C>>,
}

/// Order-`h¹` part of `(V_M)′_π(π_h ·_S y) + Π_h ·_G (V_M)′_π(y)` with
/// `π_h = hπ`. With `∂_M = μ ·_G −` the morphism intertwines `π_h ·_S` with
/// `−Π_h ·_G`.
pub fn twisted_residual_h1<C: Coefficient>(
    pi: &PoissonInput,
    y: &Multivector<C>,
    src: &mut WeightSource,
) -> Result<TwistedResidual<C>> {
    let image_of_bracket = taylor_v(&[], &schouten_act(pi.pi(), y)?, src)?;
    let v1 = taylor_v(&[pi.pi()], y, src)?;
    let boundary = v1.map(hochschild_diff_m);
    let u1 = taylor_u(&[pi.pi()], src)?;
    let v0 = taylor_v(&[], y, src)?;
    let action = u1.combine(&v0, |p, t| act_g(p, t))?;
    let residual = image_of_bracket.add(&boundary).add(&action);
    Ok(TwistedResidual { image_of_bracket, boundary, action, residual })
}

/// `Σ_{α,β} c ∂^α ⊗ ∂^β` with `α, β` unit vectors: `P = Σ πⁱʲ ∂ᵢ ⊗ ∂ⱼ`.
pub fn bivector_operator(pi: &PolyVector) -> PolyDiffOp {
    let dim = pi.dim();
    let mut out = PolyDiffOp::zero(dim);
    for (idx, c) in pi.terms() {
        if let [i, j] = idx.as_slice() {
            out.add_term(vec![MultiIndex::unit(dim, *i), MultiIndex::unit(dim, *j)], c.clone());
            out.add_term(vec![MultiIndex::unit(dim, *j), MultiIndex::unit(dim, *i)], -c);
        }
    }
    out
}

/// `{f, g} = Σ πⁱʲ ∂ᵢf ∂ⱼg` summed over all ordered pairs.
pub fn poisson_bracket(pi: &PolyVector, f: &Poly, g: &Poly) -> Result<Poly> {
    crate::polydiff::apply(&bivector_operator(pi), &[f.clone(), g.clone()])
}

/// Rational factor `1/n!` as used by the series above.
pub fn inverse_factorial(n: u32) -> Rational {
    one() / factorial(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::{int, rat};
    use crate::dmodule::FlatModule;
    use crate::hkr::hkr_map;
    use crate::polydiff::apply;
    use crate::polyvector::PolyVectorM;
    use crate::random::{random_flat_module, random_module_vec, random_poly};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mc() -> McConfig {
        McConfig { samples: 100_000, seed: 3 }
    }

    #[test]
    fn non_poisson_rejected() {
        // ∂1∧∂2 + x2 ∂2∧∂3 fails Jacobi
        let pi = PolyVector::bivector(3, &[((0, 1), Poly::one(3)), ((1, 2), Poly::var(3, 1))]);
        assert!(matches!(PoissonInput::new(pi), Err(Error::NotPoisson)));
        assert!(PoissonInput::new(PolyVector::bivector(2, &[((0, 1), Poly::var(2, 0))])).is_ok());
    }

    #[test]
    fn first_coefficient_is_hkr() {
        let mut src = WeightSource::new(mc());
        let pi = PolyVector::bivector(2, &[((0, 1), Poly::var(2, 0))]);
        let u = taylor_u(&[&pi], &mut src).unwrap();
        let terms: Vec<_> = u.terms().collect();
        assert_eq!(terms.len(), 1);
        let (mono, op) = terms[0];
        // the exact part is HKR divided by the wedge weight 1/2
        assert_eq!(*op, hkr_map(&pi).scale(&int(2)));
        let (g, est) = src.table().get(mono[0]);
        assert_eq!(*g, AdmissibleGraph::wedge());
        assert!((est.value - 0.5).abs() < 4.0 * est.std_error);
        // vector fields and functions carry weight exactly 1
        let v = PolyVector::term(2, &[1], Poly::var(2, 0));
        let uv = taylor_u(&[&v], &mut src).unwrap();
        assert_eq!(uv.evaluate(src.table()).max_std_error, 0.0);
        assert_eq!(uv.terms().next().unwrap().1, &hkr_map(&v));
    }

    #[test]
    fn trivial_module_matches_plain() {
        let mut src = WeightSource::new(mc());
        let module = FlatModule::trivial(2, 1);
        let pi = PolyVector::bivector(2, &[((0, 1), Poly::var(2, 1))]);
        let y = PolyVector::bivector(2, &[((0, 1), Poly::var(2, 0))]);
        let ym: PolyVectorM = y.map_coeffs(module.clone(), |p| ModuleVec::new(module.clone(), vec![p.clone()]).unwrap());
        let v = taylor_v(&[&pi], &ym, &mut src).unwrap();
        let u = taylor_u(&[&pi, &y], &mut src).unwrap();
        let lifted = u.map(|op| op.map_coeffs(module.clone(), |p| ModuleVec::new(module.clone(), vec![p.clone()]).unwrap()));
        assert_eq!(v, lifted);
    }

    #[test]
    fn zero_pi_is_commutative_product() {
        let mut src = WeightSource::new(mc());
        let pi = PoissonInput::new(PolyVector::zero(2)).unwrap();
        let s = build_star(&pi, 2, &mut src).unwrap();
        let f = Poly::parse(2, "x1^2 + x2").unwrap();
        let g = Poly::parse(2, "x1*x2").unwrap();
        let fg = s.star_apply(&f, &g).unwrap();
        assert_eq!(fg.coeff(0), &Weighted::exact(&f * &g));
        assert!(fg.coeff(1).is_zero() && fg.coeff(2).is_zero());
        assert!(assoc_defect(&s, &f, &g, &g).unwrap().orders.iter().all(|o| o.exact_zero));
    }

    #[test]
    fn actions_at_order_zero() {
        let mut src = WeightSource::new(mc());
        let pi = PoissonInput::new(PolyVector::bivector(2, &[((0, 1), Poly::one(2))])).unwrap();
        let s = build_star(&pi, 1, &mut src).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let module = random_flat_module(&mut rng, 2, 2, 1);
        let a = random_poly(&mut rng, 2, 2, 3);
        let m = random_module_vec(&mut rng, &module, 2);
        let l = s.star_left(&s.lift(a.clone()), &s.lift(m.clone())).unwrap();
        let r = s.star_right(&s.lift(m.clone()), &s.lift(a.clone())).unwrap();
        assert_eq!(l.coeff(0), &Weighted::exact(m.mul_poly(&a)));
        assert_eq!(r.coeff(0), &Weighted::exact(m.mul_poly(&a)));
        // for the trivial rank-one module the actions are the star product
        let triv = FlatModule::trivial(2, 1);
        let mt = ModuleVec::new(triv.clone(), vec![a.clone()]).unwrap();
        let b = random_poly(&mut rng, 2, 2, 3);
        let lt = s.star_left(&s.lift(b.clone()), &s.lift(mt)).unwrap();
        let fb = s.star_apply(&b, &a).unwrap();
        for k in 0..=1 {
            assert_eq!(lt.coeff(k).map(|v| v.entries()[0].clone()), *fb.coeff(k));
        }
    }

    #[test]
    fn bimodule_defect_vanishes_exactly_at_first_order() {
        let mut src = WeightSource::new(mc());
        let pi = PoissonInput::new(PolyVector::bivector(2, &[((0, 1), Poly::var(2, 0))])).unwrap();
        let s = build_star(&pi, 1, &mut src).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let module = random_flat_module(&mut rng, 2, 2, 1);
        let a = random_poly(&mut rng, 2, 2, 3);
        let b = random_poly(&mut rng, 2, 2, 3);
        let m = random_module_vec(&mut rng, &module, 2);
        let d = bimodule_defect(&s, &a, &b, &m).unwrap();
        for r in [&d.left, &d.middle, &d.right] {
            assert!(r.orders.iter().all(|o| o.exact_zero));
        }
    }

    #[test]
    fn beta_at_order_zero_is_signed_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut src = WeightSource::new(mc());
        let pi = PoissonInput::new(PolyVector::bivector(2, &[((0, 1), Poly::one(2))])).unwrap();
        let s = build_star(&pi, 1, &mut src).unwrap();
        let module = random_flat_module(&mut rng, 2, 2, 1);
        for q in -1..=1 {
            let l = crate::random::random_polydiff(&mut rng, &module, q, 2, 3, |r| random_module_vec(r, &module, 2));
            let b = s.beta(&s.lift(l.clone())).unwrap();
            let expect = if q.rem_euclid(2) == 1 { hochschild_diff_m(&l).neg() } else { hochschild_diff_m(&l) };
            assert_eq!(b.coeff(0), &Weighted::exact(expect));
            let bb = s.beta(&b).unwrap();
            assert!(bb.coeff(0).is_zero());
        }
    }

    #[test]
    fn beta_matches_function_level_formula() {
        // β(λ)(a₁, …, a_{n+1}) = a₁*λ(a₂, …) + Σ (−1)ⁱ λ(…, aᵢ*aᵢ₊₁, …) + (−1)^{n+1} λ(…)*a_{n+1}
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut src = WeightSource::new(mc());
        let pi = PoissonInput::new(PolyVector::bivector(2, &[((0, 1), Poly::var(2, 1))])).unwrap();
        let s = build_star(&pi, 1, &mut src).unwrap();
        let module = random_flat_module(&mut rng, 2, 2, 1);
        for q in -1..=1i32 {
            let n = (q + 1) as usize;
            let l = crate::random::random_polydiff(&mut rng, &module, q, 2, 2, |r| random_module_vec(r, &module, 1));
            let args: Vec<Poly> = (0..=n).map(|_| random_poly(&mut rng, 2, 2, 2)).collect();
            let tensor = s.beta(&s.lift(l.clone())).unwrap();
            let lhs = tensor.map(|w| w.map(|op| apply(op, &args).unwrap()));
            let lam = |xs: &[WSeries<Poly>]| -> WSeries<ModuleVec> {
                let mut acc = HSeries::filled(s.cap(), Weighted::zero());
                for (order, mono, list) in expand(xs, s.cap()) {
                    acc.coeff_mut(order).add_term(mono, apply(&l, &list).unwrap());
                }
                acc
            };
            let lifted: Vec<WSeries<Poly>> = args.iter().map(|a| s.lift(a.clone())).collect();
            let mut rhs = s.star_left(&lifted[0], &lam(&lifted[1..])).unwrap();
            for i in 1..=n {
                let mut xs = lifted.clone();
                let prod = s.star(&xs[i - 1], &xs[i]).unwrap();
                xs.splice(i - 1..=i, iter::once(prod));
                let term = lam(&xs);
                let term = if i % 2 == 1 { term.map(|w| w.scale(&int(-1))) } else { term };
                rhs = HSeries::from_coeffs(rhs.coeffs().iter().zip(term.coeffs()).map(|(a, b)| a.add(b)).collect());
            }
            let last = s.star_right(&lam(&lifted[..n]), &lifted[n]).unwrap();
            let last = if (n + 1) % 2 == 1 { last.map(|w| w.scale(&int(-1))) } else { last };
            rhs = HSeries::from_coeffs(rhs.coeffs().iter().zip(last.coeffs()).map(|(a, b)| a.add(b)).collect());
            assert_eq!(lhs, rhs, "degree {q}");
        }
    }

    /// Every choice of one monomial per argument with total order `<= cap`.
    fn expand(xs: &[WSeries<Poly>], cap: usize) -> Vec<(usize, Vec<usize>, Vec<Poly>)> {
        let mut out = vec![(0, Vec::new(), Vec::new())];
        for x in xs {
            let mut next = Vec::new();
            for (o, mono, list) in &out {
                for k in 0..=cap - o {
                    for (m, p) in x.coeff(k).terms() {
                        let mut mm: Vec<usize> = mono.iter().chain(m).copied().collect();
                        mm.sort_unstable();
                        let mut ll: Vec<Poly> = list.clone();
                        ll.push(p.clone());
                        next.push((o + k, mm, ll));
                    }
                }
            }
            out = next;
        }
        out
    }

    #[test]
    fn cup_pi_at_order_zero_is_cup() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut src = WeightSource::new(mc());
        let pi = PoissonInput::new(PolyVector::bivector(2, &[((0, 1), Poly::one(2))])).unwrap();
        let s = build_star(&pi, 1, &mut src).unwrap();
        let t1 = crate::random::random_polydiff(&mut rng, &2, 0, 2, 2, |r| random_poly(r, 2, 2, 2));
        let t2 = crate::random::random_polydiff(&mut rng, &2, 1, 2, 2, |r| random_poly(r, 2, 2, 2));
        let c = s.cup_pi(&s.lift(t1.clone()), &s.lift(t2.clone())).unwrap();
        assert_eq!(c.coeff(0), &Weighted::exact(crate::polydiff::cup(&t1, &t2).unwrap()));
        // apply-level: (t₁ ⊔_Π t₂)(a, b, c) = t₁(a) * t₂(b, c)
        let args: Vec<Poly> = (0..3).map(|_| random_poly(&mut rng, 2, 2, 2)).collect();
        let lhs = c.map(|w| w.map(|op| apply(op, &args).unwrap()));
        let x = apply(&t1, &args[..1]).unwrap();
        let y = apply(&t2, &args[1..]).unwrap();
        assert_eq!(lhs, s.star_apply(&x, &y).unwrap());
    }

    #[test]
    fn twisted_morphism_order_zero() {
        let mut src = WeightSource::new(mc());
        let module = FlatModule::trivial(2, 2);
        let m = ModuleVec::basis(module.clone(), 1);
        let pi = PoissonInput::new(PolyVector::zero(2)).unwrap();
        let t = twisted_morphism(&pi, &PolyVectorM::scalar(m.clone()), 2, &mut src).unwrap();
        assert_eq!(t.coeff(0), &Weighted::exact(Polydiff::scalar(m)));
        assert!(t.coeff(1).is_zero() && t.coeff(2).is_zero());
        let _ = rat(1, 2);
    }
}
