use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

/// Exponent vector `α = (α₁, …, α_d)`, used both for monomials `x^α` and for
/// derivatives `∂^α`.
///
/// Ordered graded-lexicographically: total degree first, then lexicographic.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(SmallVec<[u32; 4]>);

impl MultiIndex {
    pub fn zeros(dim: usize) -> Self {
        MultiIndex(SmallVec::from_elem(0, dim))
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.0[axis] = 1;
        m
    }

    pub fn from_slice(exps: &[u32]) -> Self {
        MultiIndex(SmallVec::from_slice(exps))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, axis: usize) -> u32 {
        self.0[axis]
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        debug_assert_eq!(self.dim(), other.dim());
        let mut out = SmallVec::with_capacity(self.dim());
        for (a, b) in self.0.iter().zip(&other.0) {
            out.push(a.checked_sub(*b)?);
        }
        Some(MultiIndex(out))
    }

    pub fn with_incremented(&self, axis: usize) -> MultiIndex {
        let mut m = self.clone();
        m.0[axis] += 1;
        m
    }

    /// `α!` as an integer.
    pub fn factorial(&self) -> u128 {
        self.0.iter().map(|&e| (1..=e as u128).product::<u128>()).product()
    }

    /// Axes repeated by multiplicity, e.g. `(2,0,1)` gives `[0,0,2]`.
    pub fn axes(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.total() as usize);
        for (axis, &e) in self.0.iter().enumerate() {
            out.extend(std::iter::repeat_n(axis, e as usize));
        }
        out
    }

    /// All ways to write `self = β₀ + … + β_{parts-1}`, each with its
    /// multinomial coefficient `α! / (β₀! ⋯ β_{parts-1}!)`.
    ///
    /// This is the iterated coproduct of `∂^α` with `parts` outputs.
    pub fn splits(&self, parts: usize) -> Vec<(Vec<MultiIndex>, u128)> {
        assert!(parts >= 1);
        let dim = self.dim();
        // Per-axis compositions, then a cartesian product across axes.
        let per_axis: Vec<Vec<Vec<u32>>> =
            self.0.iter().map(|&e| compositions(e, parts)).collect();
        let mut out = Vec::new();
        let mut choice = vec![0usize; dim];
        loop {
            let mut pieces = vec![MultiIndex::zeros(dim); parts];
            let mut coeff: u128 = 1;
            for axis in 0..dim {
                let comp = &per_axis[axis][choice[axis]];
                let mut denom: u128 = 1;
                for (p, &c) in comp.iter().enumerate() {
                    pieces[p].0[axis] = c;
                    denom *= (1..=c as u128).product::<u128>();
                }
                let num: u128 = (1..=self.0[axis] as u128).product();
                coeff *= num / denom;
            }
            out.push((pieces, coeff));
            // odometer
            let mut axis = 0;
            loop {
                if axis == dim {
                    return out;
                }
                choice[axis] += 1;
                if choice[axis] < per_axis[axis].len() {
                    break;
                }
                choice[axis] = 0;
                axis += 1;
            }
        }
    }

    /// All exponent vectors of dimension `dim` with total degree exactly `deg`.
    pub fn all_of_degree(dim: usize, deg: u32) -> Vec<MultiIndex> {
        if dim == 0 {
            return if deg == 0 { vec![MultiIndex::zeros(0)] } else { Vec::new() };
        }
        compositions(deg, dim).into_iter().map(|v| MultiIndex(SmallVec::from_vec(v))).collect()
    }

    /// All exponent vectors of total degree `<= deg`, in graded order.
    pub fn all_up_to_degree(dim: usize, deg: u32) -> Vec<MultiIndex> {
        let mut out: Vec<MultiIndex> = (0..=deg).flat_map(|k| Self::all_of_degree(dim, k)).collect();
        out.sort();
        out
    }
}

/// Weak compositions of `n` into `parts` non-negative parts.
fn compositions(n: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total().cmp(&other.total()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_of_second_derivative() {
        let a = MultiIndex::from_slice(&[2]);
        let mut s = a.splits(2);
        s.sort_by(|x, y| x.0.cmp(&y.0));
        let coeffs: Vec<u128> = s.iter().map(|(_, c)| *c).collect();
        assert_eq!(coeffs, vec![1, 2, 1]);
    }

    #[test]
    fn split_coefficients_sum_to_power() {
        // Σ multinomial = parts^|α|
        let a = MultiIndex::from_slice(&[2, 1, 1]);
        let total: u128 = a.splits(3).iter().map(|(_, c)| c).sum();
        assert_eq!(total, 3u128.pow(4));
    }

    #[test]
    fn graded_order() {
        let a = MultiIndex::from_slice(&[0, 2]);
        let b = MultiIndex::from_slice(&[1, 0]);
        assert!(b < a);
    }
}
