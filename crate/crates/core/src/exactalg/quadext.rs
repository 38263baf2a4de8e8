//! The field Q(sqrt 2).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::rational::{format_rational, int, Rational};
use crate::error::{Error, Result};

/// `a + b*sqrt(2)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadExt {
    pub a: Rational,
    pub b: Rational,
}

impl QuadExt {
    pub fn new(a: Rational, b: Rational) -> Self {
        Self { a, b }
    }

    pub fn rational(a: Rational) -> Self {
        Self { a, b: Rational::zero() }
    }

    pub fn sqrt2() -> Self {
        Self::new(Rational::zero(), int(1))
    }

    pub fn zero() -> Self {
        Self::rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::rational(Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.a.clone(), -self.b.clone())
    }

    /// Field norm `a^2 - 2 b^2`.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - int(2) * &self.b * &self.b
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::Singular);
        }
        let c = self.conj();
        Ok(Self::new(c.a / &n, c.b / &n))
    }
}

impl Add for &QuadExt {
    type Output = QuadExt;
    fn add(self, rhs: &QuadExt) -> QuadExt {
        QuadExt::new(&self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl Sub for &QuadExt {
    type Output = QuadExt;
    fn sub(self, rhs: &QuadExt) -> QuadExt {
        QuadExt::new(&self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl Mul for &QuadExt {
    type Output = QuadExt;
    fn mul(self, rhs: &QuadExt) -> QuadExt {
        QuadExt::new(
            &self.a * &rhs.a + int(2) * &self.b * &rhs.b,
            &self.a * &rhs.b + &self.b * &rhs.a,
        )
    }
}

impl Neg for &QuadExt {
    type Output = QuadExt;
    fn neg(self) -> QuadExt {
        QuadExt::new(-self.a.clone(), -self.b.clone())
    }
}

impl fmt::Debug for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*sqrt2", format_rational(&self.a), format_rational(&self.b))
    }
}

/// Dense square-or-rectangular matrix over Q(sqrt 2).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QuadMatrix {
    rows: usize,
    cols: usize,
    data: Vec<QuadExt>,
}

impl QuadMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> QuadExt) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { QuadExt::one() } else { QuadExt::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &QuadExt {
        &self.data[i * self.cols + j]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                op: "QuadMatrix::mul",
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = QuadExt::zero();
            for k in 0..self.cols {
                let a = self.get(i, k);
                let b = other.get(k, j);
                if !a.is_zero() && !b.is_zero() {
                    acc = &acc + &(a * b);
                }
            }
            acc
        }))
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            self.get(i / other.rows, j / other.cols) * other.get(i % other.rows, j % other.cols)
        })
    }

    pub fn is_rational(&self) -> bool {
        self.data.iter().all(QuadExt::is_rational)
    }

    /// `M M^T = I`, decided exactly.
    pub fn is_orthogonal(&self) -> bool {
        self.rows == self.cols
            && self
                .mul(&self.transpose())
                .map(|p| p == Self::identity(self.rows))
                .unwrap_or(false)
    }

    pub fn to_rational(&self) -> Option<super::RatMatrix> {
        if !self.is_rational() {
            return None;
        }
        Some(super::RatMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).a.clone()))
    }

    pub fn from_rational(m: &super::RatMatrix) -> Self {
        Self::from_fn(m.rows(), m.cols(), |i, j| QuadExt::rational(m.get(i, j).clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rational::ratio;

    #[test]
    fn sqrt2_squares_to_two() {
        let s = QuadExt::sqrt2();
        assert_eq!(&s * &s, QuadExt::rational(int(2)));
    }

    #[test]
    fn inverse_roundtrip() {
        let x = QuadExt::new(ratio(3, 2), int(-1));
        let inv = x.inverse().unwrap();
        assert_eq!(&x * &inv, QuadExt::one());
        assert!(QuadExt::zero().inverse().is_err());
    }

    #[test]
    fn hadamard_is_orthogonal() {
        let h = QuadExt::new(Rational::zero(), ratio(1, 2)); // 1/sqrt2
        let m = QuadMatrix::from_fn(2, 2, |i, j| if i == 1 && j == 1 { -&h } else { h.clone() });
        assert!(m.is_orthogonal());
        assert!(!m.is_rational());
        let h2 = m.kron(&m);
        assert!(h2.is_rational());
        assert!(h2.is_orthogonal());
    }
}
