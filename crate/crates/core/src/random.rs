//! Seeded random generators for the randomized identity suites.

use std::sync::Arc;

use rand::Rng;

use crate::algebra::{MultiIndex, Poly, Rational};
use crate::dmodule::{FlatModule, Matrix, ModuleVec};
use crate::polydiff::Polydiff;
use crate::polyvector::Multivector;
use crate::coefficient::Coefficient;

pub fn random_rational<R: Rng>(rng: &mut R) -> Rational {
    let num: i64 = rng.gen_range(-4..=4);
    let den: i64 = rng.gen_range(1..=3);
    Rational::new(num.into(), den.into())
}

/// A polynomial with up to `max_terms` terms of total degree `<= max_deg`.
pub fn random_poly<R: Rng>(rng: &mut R, dim: usize, max_deg: u32, max_terms: usize) -> Poly {
    let exps = MultiIndex::all_up_to_degree(dim, max_deg);
    let mut p = Poly::zero(dim);
    for _ in 0..rng.gen_range(0..=max_terms) {
        let e = exps[rng.gen_range(0..exps.len())].clone();
        p.add_term(e, random_rational(rng));
    }
    p
}

pub fn nonzero_poly<R: Rng>(rng: &mut R, dim: usize, max_deg: u32, max_terms: usize) -> Poly {
    loop {
        let p = random_poly(rng, dim, max_deg, max_terms.max(1));
        if !p.is_zero() {
            return p;
        }
    }
}

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

/// A flat connection obtained by gauge-transforming `∂ᵢφ · N` (N constant)
/// with a unipotent polynomial matrix `g`: `Aᵢ = g⁻¹(∂ᵢφ N)g + g⁻¹∂ᵢg`.
pub fn random_flat_module<R: Rng>(rng: &mut R, dim: usize, rank: usize, deg: u32) -> Arc<FlatModule> {
    // g = 1 + U with U strictly upper triangular, g⁻¹ = Σ (−U)^k
    let mut u: Matrix = vec![vec![Poly::zero(dim); rank]; rank];
    for (i, row) in u.iter_mut().enumerate() {
        for cell in row.iter_mut().skip(i + 1) {
            *cell = random_poly(rng, dim, deg, 2);
        }
    }
    let ident: Matrix =
        (0..rank).map(|i| (0..rank).map(|j| if i == j { Poly::one(dim) } else { Poly::zero(dim) }).collect()).collect();
    let add = |a: &Matrix, b: &Matrix| -> Matrix {
        a.iter().zip(b).map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect()).collect()
    };
    let neg_u: Matrix = u.iter().map(|row| row.iter().map(|p| -p).collect()).collect();
    let g = add(&ident, &u);
    let mut ginv = ident.clone();
    let mut power = ident;
    for _ in 1..rank {
        power = mat_mul(&power, &neg_u, dim);
        ginv = add(&ginv, &power);
    }
    let n: Matrix = (0..rank)
        .map(|_| (0..rank).map(|_| Poly::constant(dim, random_rational(rng))).collect())
        .collect();
    let phi = random_poly(rng, dim, deg + 1, 3);
    let connection = (0..dim)
        .map(|i| {
            let dphi = phi.partial(i);
            let b: Matrix = n.iter().map(|row| row.iter().map(|c| c * &dphi).collect()).collect();
            let dg: Matrix = g.iter().map(|row| row.iter().map(|p| p.partial(i)).collect()).collect();
            let conj = mat_mul(&mat_mul(&ginv, &b, dim), &g, dim);
            add(&conj, &mat_mul(&ginv, &dg, dim))
        })
        .collect();
    FlatModule::new(dim, rank, connection).expect("gauge transforms of flat connections are flat")
}

pub fn random_module_vec<R: Rng>(rng: &mut R, module: &Arc<FlatModule>, max_deg: u32) -> ModuleVec {
    let entries = (0..module.rank()).map(|_| random_poly(rng, module.dim(), max_deg, 3)).collect();
    ModuleVec::new(module.clone(), entries).expect("entries match rank")
}

/// Random increasing index tuple of length `len` from `0..dim`.
pub fn random_indices<R: Rng>(rng: &mut R, dim: usize, len: usize) -> Option<Vec<usize>> {
    if len > dim {
        return None;
    }
    let mut all: Vec<usize> = (0..dim).collect();
    for i in 0..len {
        let j = rng.gen_range(i..dim);
        all.swap(i, j);
    }
    let mut idx = all[..len].to_vec();
    idx.sort_unstable();
    Some(idx)
}

/// Homogeneous polyvector of degree `degree` (so `degree + 1` vector slots).
pub fn random_multivector<R: Rng, C: Coefficient>(
    rng: &mut R,
    ctx: &C::Ctx,
    degree: i32,
    terms: usize,
    mut coeff: impl FnMut(&mut R) -> C,
) -> Multivector<C> {
    let dim = C::ctx_dim(ctx);
    let mut out = Multivector::zero(ctx.clone());
    let len = (degree + 1) as usize;
    for _ in 0..terms {
        if let Some(idx) = random_indices(rng, dim, len) {
            let c = coeff(rng);
            out.add_term(idx, c);
        }
    }
    out
}

/// Homogeneous polydifferential operator of degree `degree` with slot orders `<= max_order`.
pub fn random_polydiff<R: Rng, C: Coefficient>(
    rng: &mut R,
    ctx: &C::Ctx,
    degree: i32,
    max_order: u32,
    terms: usize,
    mut coeff: impl FnMut(&mut R) -> C,
) -> Polydiff<C> {
    let dim = C::ctx_dim(ctx);
    let alphas = MultiIndex::all_up_to_degree(dim, max_order);
    let mut out = Polydiff::zero(ctx.clone());
    for _ in 0..terms {
        let key: Vec<MultiIndex> =
            (0..(degree + 1) as usize).map(|_| alphas[rng.gen_range(0..alphas.len())].clone()).collect();
        let c = coeff(rng);
        out.add_term(key, c);
    }
    out
}
