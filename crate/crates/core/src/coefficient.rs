//! Coefficients of polyvectors and polydifferential operators: either plain
//! functions (`Poly`) or elements of a flat module (`ModuleVec`).

use std::fmt::Debug;
use std::sync::Arc;

use crate::algebra::{MultiIndex, Poly, Rational};
use crate::dmodule::{same_module, FlatModule, ModuleVec};

pub trait Coefficient: Clone + PartialEq + Debug + Send + Sync {
    /// What a zero needs to know: the dimension, or the module.
    type Ctx: Clone + Debug + Send + Sync;

    fn ctx(&self) -> Self::Ctx;
    fn ctx_dim(ctx: &Self::Ctx) -> usize;
    fn ctx_eq(a: &Self::Ctx, b: &Self::Ctx) -> bool;
    fn zero(ctx: &Self::Ctx) -> Self;

    fn is_zero(&self) -> bool;
    fn add_assign(&mut self, other: &Self);
    fn scale(&self, c: &Rational) -> Self;
    fn mul_poly(&self, f: &Poly) -> Self;
    /// `∂ᵢ` on functions, `∇ᵢ` on module elements.
    fn derive_axis(&self, axis: usize) -> Self;
    fn derive(&self, alpha: &MultiIndex) -> Self;
}

impl Coefficient for Poly {
    type Ctx = usize;

    fn ctx(&self) -> usize {
        self.dim()
    }
    fn ctx_dim(ctx: &usize) -> usize {
        *ctx
    }
    fn ctx_eq(a: &usize, b: &usize) -> bool {
        a == b
    }
    fn zero(ctx: &usize) -> Self {
        Poly::zero(*ctx)
    }
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }
    fn add_assign(&mut self, other: &Self) {
        self.add_assign_ref(other)
    }
    fn scale(&self, c: &Rational) -> Self {
        Poly::scale(self, c)
    }
    fn mul_poly(&self, f: &Poly) -> Self {
        self * f
    }
    fn derive_axis(&self, axis: usize) -> Self {
        self.partial(axis)
    }
    fn derive(&self, alpha: &MultiIndex) -> Self {
        Poly::derive(self, alpha)
    }
}

impl Coefficient for ModuleVec {
    type Ctx = Arc<FlatModule>;

    fn ctx(&self) -> Arc<FlatModule> {
        self.module().clone()
    }
    fn ctx_dim(ctx: &Arc<FlatModule>) -> usize {
        ctx.dim()
    }
    fn ctx_eq(a: &Arc<FlatModule>, b: &Arc<FlatModule>) -> bool {
        same_module(a, b)
    }
    fn zero(ctx: &Arc<FlatModule>) -> Self {
        ModuleVec::zero(ctx.clone())
    }
    fn is_zero(&self) -> bool {
        ModuleVec::is_zero(self)
    }
    fn add_assign(&mut self, other: &Self) {
        self.add_assign_ref(other)
    }
    fn scale(&self, c: &Rational) -> Self {
        ModuleVec::scale(self, c)
    }
    fn mul_poly(&self, f: &Poly) -> Self {
        ModuleVec::mul_poly(self, f)
    }
    fn derive_axis(&self, axis: usize) -> Self {
        self.nabla(axis)
    }
    fn derive(&self, alpha: &MultiIndex) -> Self {
        self.nabla_multi(alpha)
    }
}
