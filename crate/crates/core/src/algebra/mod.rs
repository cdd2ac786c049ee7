//! Exact arithmetic: rationals, multi-indices, polynomials, h-series, matrices.

pub mod matrix;
pub mod multi_index;
pub mod perm;
pub mod poly;
pub mod rational;
pub mod series;

pub use matrix::QMatrix;
pub use multi_index::MultiIndex;
pub use poly::Poly;
pub use rational::Rational;
pub use series::HSeries;
