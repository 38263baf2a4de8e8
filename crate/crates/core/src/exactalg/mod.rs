//! Exact linear algebra over Q, Q(sqrt 2) and GF(2), plus an exact LP solver.

pub mod bits;
pub mod integer;
pub mod lp;
pub mod matrix;
pub mod quadext;
pub mod rational;

pub use bits::BitMatrix;
pub use lp::solve_nonneg_combination;
pub use matrix::{RatMatrix, Rref};
pub use quadext::{QuadExt, QuadMatrix};
pub use rational::{format_rational, int, parse_rational, ratio, Rational};

/// `tr(M^t)`; see [`RatMatrix::trace_pow`].
pub fn trace_pow(m: &RatMatrix, t: u32) -> crate::error::Result<Rational> {
    m.trace_pow(t)
}

pub fn rref(m: &RatMatrix) -> Rref {
    m.rref()
}

pub fn det(m: &RatMatrix) -> crate::error::Result<Rational> {
    m.det()
}
