//! The HKR map and the constant-coefficient model complex `⊕ₚ ⊗^p S(ℝ^d)`.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::algebra::perm::permutations;
use crate::algebra::rational::factorial;
use crate::algebra::{MultiIndex, QMatrix, Rational};
use crate::coefficient::Coefficient;
use crate::polydiff::Polydiff;
use crate::polyvector::Multivector;

/// `v₀ ∧ … ∧ v_n ⊗ m ↦ (1/(n+1)!) Σ_σ ε(σ) v_{σ(0)} ⊗ … ⊗ v_{σ(n)} ⊗ m`.
pub fn hkr_map<C: Coefficient>(t: &Multivector<C>) -> Polydiff<C> {
    let dim = t.dim();
    let mut out = Polydiff::zero(t.ctx().clone());
    for (idx, c) in t.terms() {
        let n = idx.len();
        let norm = Rational::one() / factorial(n as u32);
        for (perm, odd) in permutations(n) {
            let key: Vec<MultiIndex> = perm.iter().map(|&p| MultiIndex::unit(dim, idx[p])).collect();
            let s = if odd { -norm.clone() } else { norm.clone() };
            out.add_term(key, c.scale(&s));
        }
    }
    out
}

/// Basis of `⊗^p S(ℝ^d)` truncated to total symmetric degree `<= cap`:
/// tuples `(β₁, …, β_p)` with `Σ|βᵢ| <= cap`, in a fixed order.
pub fn model_basis(dim: usize, arity: usize, cap: u32) -> Vec<Vec<MultiIndex>> {
    let mut out: Vec<Vec<MultiIndex>> = vec![Vec::new()];
    for _ in 0..arity {
        let mut next = Vec::new();
        for prefix in &out {
            let used: u32 = prefix.iter().map(MultiIndex::total).sum();
            for b in MultiIndex::all_up_to_degree(dim, cap - used) {
                let mut t = prefix.clone();
                t.push(b);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// `∂c = c⊗1 + (−1)^{p−1} 1⊗c − (−1)^{p−1} Σᵢ (−1)^i Δᵢ(c)` on arity-`p`
/// tensors: the Hochschild differential `[μ, −]` on constant-coefficient
/// cochains. Total symmetric degree is preserved, so the truncation is a
/// subcomplex. Rows index arity `p+1`, columns arity `p`.
pub fn model_differential(dim: usize, arity: usize, cap: u32) -> QMatrix {
    let src = model_basis(dim, arity, cap);
    let dst = model_basis(dim, arity + 1, cap);
    let index: std::collections::HashMap<&Vec<MultiIndex>, usize> = dst.iter().enumerate().map(|(i, b)| (b, i)).collect();
    let mut m = QMatrix::zeros(dst.len(), src.len());
    let outer = if arity % 2 == 1 { Rational::one() } else { -Rational::one() }; // (−1)^{p−1}
    let zero = MultiIndex::zeros(dim);
    for (col, c) in src.iter().enumerate() {
        let mut right = c.clone();
        right.push(zero.clone());
        m.add_to(index[&right], col, &Rational::one());
        let mut left = vec![zero.clone()];
        left.extend(c.iter().cloned());
        m.add_to(index[&left], col, &outer);
        for (i, beta) in c.iter().enumerate() {
            let s = if i % 2 == 0 { -outer.clone() } else { outer.clone() };
            for (parts, mult) in beta.splits(2) {
                let mut key = c[..i].to_vec();
                key.extend(parts);
                key.extend_from_slice(&c[i + 1..]);
                m.add_to(index[&key], col, &(&s * Rational::from_integer(mult.into())));
            }
        }
    }
    m
}

/// `Θ(e_{i₁} ∧ … ∧ e_{i_p}) = (1/p!) Σ_σ ε(σ) e_{i_σ(1)} ⊗ … ⊗ e_{i_σ(p)}` as
/// a coordinate vector in [`model_basis`].
pub fn theta_vector(dim: usize, idx: &[usize], cap: u32) -> Vec<Rational> {
    let basis = model_basis(dim, idx.len(), cap);
    let mut v = vec![Rational::zero(); basis.len()];
    let norm = Rational::one() / factorial(idx.len() as u32);
    for (perm, odd) in permutations(idx.len()) {
        let key: Vec<MultiIndex> = perm.iter().map(|&p| MultiIndex::unit(dim, idx[p])).collect();
        if let Some(pos) = basis.iter().position(|b| *b == key) {
            v[pos] += if odd { -norm.clone() } else { norm.clone() };
        }
    }
    v
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ModelCohomology {
    pub arity: usize,
    pub cap: u32,
    /// Arities `0..=cap` whose cohomology is not clipped by the truncation.
    pub stable_range: [usize; 2],
    pub kernel_dim: usize,
    pub image_dim: usize,
    pub cohomology_dim: usize,
    /// Number of independent classes spanned by the Θ-images.
    pub theta_rank: usize,
    pub theta_are_cocycles: bool,
}

impl ModelCohomology {
    pub fn in_stable_range(&self) -> bool {
        self.arity <= self.stable_range[1]
    }
}

/// Kernel, image and cohomology dimensions at arity `p` with cap `D`.
pub fn model_cohomology(dim: usize, arity: usize, cap: u32) -> ModelCohomology {
    let d_out = model_differential(dim, arity, cap);
    let kernel_dim = d_out.cols() - d_out.rank();
    let image = if arity == 0 { None } else { Some(model_differential(dim, arity - 1, cap)) };
    let image_dim = image.as_ref().map_or(0, QMatrix::rank);

    let thetas: Vec<Vec<Rational>> = if arity == 0 || arity as u32 > cap {
        Vec::new()
    } else {
        index_subsets(dim, arity).iter().map(|s| theta_vector(dim, s, cap)).collect()
    };
    let theta_are_cocycles = thetas.iter().all(|v| d_out.apply(v).iter().all(Zero::is_zero));
    let theta_rank = if arity == 0 {
        // the unit is the arity-0 class
        usize::from(kernel_dim > 0)
    } else {
        let mut cols: Vec<Vec<Rational>> = Vec::new();
        if let Some(im) = &image {
            for j in 0..im.cols() {
                cols.push((0..im.rows()).map(|i| im.get(i, j).clone()).collect());
            }
        }
        let base = rank_of_columns(&cols, d_out.cols());
        cols.extend(thetas.iter().cloned());
        rank_of_columns(&cols, d_out.cols()) - base
    };
    ModelCohomology {
        arity,
        cap,
        stable_range: [0, cap as usize],
        kernel_dim,
        image_dim,
        cohomology_dim: kernel_dim - image_dim,
        theta_rank,
        theta_are_cocycles,
    }
}

fn rank_of_columns(cols: &[Vec<Rational>], len: usize) -> usize {
    if cols.is_empty() {
        return 0;
    }
    let rows: Vec<Vec<Rational>> = cols.iter().map(|c| c[..len].to_vec()).collect();
    QMatrix::from_rows(rows).rank()
}

/// Increasing `k`-subsets of `0..n`.
pub fn index_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}
