//! Truncated power series in the formal parameter `h`.

use crate::error::{Error, Result};

use super::poly::Poly;

/// `Σ_{k ≤ cap} c_k h^k`, with `h^{cap+1} ≡ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct HSeries<T> {
    coeffs: Vec<T>,
}

impl<T: Clone> HSeries<T> {
    /// A series whose every coefficient is `zero`.
    pub fn filled(cap: usize, zero: T) -> Self {
        HSeries { coeffs: vec![zero; cap + 1] }
    }

    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least the h^0 coefficient");
        HSeries { coeffs }
    }

    pub fn cap(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &T {
        &self.coeffs[k]
    }

    pub fn coeff_mut(&mut self, k: usize) -> &mut T {
        &mut self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> HSeries<U> {
        HSeries { coeffs: self.coeffs.iter().map(f).collect() }
    }

    /// Cauchy product `Σ_{i+j=k} f(a_i, b_j)` truncated at the common cap.
    pub fn convolve<U: Clone, V: Clone>(
        &self,
        other: &HSeries<U>,
        zero: V,
        f: impl Fn(&T, &U) -> V,
        add: impl Fn(&mut V, V),
    ) -> Result<HSeries<V>> {
        if self.cap() != other.cap() {
            return Err(Error::CapMismatch(self.cap(), other.cap()));
        }
        let cap = self.cap();
        let mut out = HSeries::filled(cap, zero);
        for i in 0..=cap {
            for j in 0..=cap - i {
                let term = f(&self.coeffs[i], &other.coeffs[j]);
                add(&mut out.coeffs[i + j], term);
            }
        }
        Ok(out)
    }

    /// Re-truncates to a smaller cap.
    pub fn truncate(&self, cap: usize) -> HSeries<T> {
        HSeries { coeffs: self.coeffs[..=cap.min(self.cap())].to_vec() }
    }
}

impl HSeries<Poly> {
    pub fn zero_poly(cap: usize, dim: usize) -> Self {
        Self::filled(cap, Poly::zero(dim))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.cap() != other.cap() {
            return Err(Error::CapMismatch(self.cap(), other.cap()));
        }
        Ok(HSeries { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect() })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let dim = self.coeffs[0].dim();
        self.convolve(other, Poly::zero(dim), |a, b| a * b, |acc, t| acc.add_assign_ref(&t))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Poly::is_zero)
    }
}
