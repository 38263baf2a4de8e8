//! Dense matrices over the rationals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::rational::{common_denominator, format_rational, int, Rational};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: RatMatrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

impl RatMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Rational>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                op: "RatMatrix::new",
                left: (rows, cols),
                right: (data.len(), 1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { int(1) } else { Rational::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds from row vectors; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let v = rows
            .iter()
            .map(|row| row.as_ref().iter().map(|&x| int(x)).collect())
            .collect();
        Self::from_rows(v).expect("ragged integer rows")
    }

    pub fn symmetric(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let m = Self::from_rows(rows)?;
        if !m.is_symmetric() {
            return Err(Error::InvalidArgument("matrix is not symmetric".into()));
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                op: "mul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    fn zip_with(&self, other: &Self, op: &'static str, f: impl Fn(&Rational, &Rational) -> Rational) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn trace(&self) -> Result<Rational> {
        self.require_square()?;
        Ok((0..self.rows).map(|i| self.get(i, i)).sum())
    }

    /// `tr(M^t)` for `t >= 1`.
    pub fn trace_pow(&self, t: u32) -> Result<Rational> {
        self.require_square()?;
        if t < 1 {
            return Err(Error::InvalidArgument("trace_pow needs t >= 1".into()));
        }
        let mut acc = self.clone();
        for _ in 1..t {
            acc = &acc * self;
        }
        acc.trace()
    }

    /// Unique reduced row echelon form.
    pub fn rref(&self) -> Rref {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else {
                continue;
            };
            m.swap_rows(p, r);
            let inv = m.get(r, c).recip();
            for j in c..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c).clone();
                for j in c..m.cols {
                    let v = m.get(i, j) - &f * m.get(r, j);
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Rref {
            rank: pivots.len(),
            matrix: m,
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Nonzero rows of the RREF: a canonical basis of the row space.
    pub fn row_space(&self) -> Self {
        let rref = self.rref();
        Self::from_fn(rref.rank, self.cols, |i, j| rref.matrix.get(i, j).clone())
    }

    /// Basis (as rows) of the right kernel `{x : M x = 0}`.
    pub fn kernel(&self) -> Self {
        let rref = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !rref.pivots.contains(c)).collect();
        let mut out = Self::zeros(free.len(), self.cols);
        for (k, &f) in free.iter().enumerate() {
            out.set(k, f, int(1));
            for (i, &p) in rref.pivots.iter().enumerate() {
                out.set(k, p, -rref.matrix.get(i, f).clone());
            }
        }
        out
    }

    /// Determinant by fraction-free (Bareiss) elimination on an integer rescaling.
    pub fn det(&self) -> Result<Rational> {
        self.require_square()?;
        let n = self.rows;
        if n == 0 {
            return Ok(int(1));
        }
        let mut scale = BigInt::one();
        let mut a: Vec<Vec<BigInt>> = (0..n)
            .map(|i| {
                let row = self.row(i);
                let d = common_denominator(row);
                scale *= &d;
                row.iter().map(|x| (x * Rational::from_integer(d.clone())).to_integer()).collect()
            })
            .collect();
        let d = bareiss_det(&mut a);
        Ok(Rational::new(d, scale))
    }

    pub fn inverse(&self) -> Result<Self> {
        self.require_square()?;
        let n = self.rows;
        let aug = Self::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self.get(i, j).clone()
            } else if j - n == i {
                int(1)
            } else {
                Rational::zero()
            }
        });
        let rref = aug.rref();
        if rref.pivots.len() < n || rref.pivots[n - 1] != n - 1 {
            return Err(Error::Singular);
        }
        Ok(Self::from_fn(n, n, |i, j| rref.matrix.get(i, n + j).clone()))
    }

    pub fn block_diag(&self, other: &Self) -> Self {
        let (r, c) = (self.rows + other.rows, self.cols + other.cols);
        Self::from_fn(r, c, |i, j| {
            if i < self.rows && j < self.cols {
                self.get(i, j).clone()
            } else if i >= self.rows && j >= self.cols {
                other.get(i - self.rows, j - self.cols).clone()
            } else {
                Rational::zero()
            }
        })
    }

    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::ShapeMismatch {
                op: "vstack",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Symmetric with every leading principal minor positive.
    pub fn is_positive_definite(&self) -> bool {
        self.is_square()
            && self.is_symmetric()
            && (1..=self.rows).all(|k| {
                let minor = Self::from_fn(k, k, |i, j| self.get(i, j).clone());
                minor.det().map(|d| d > Rational::zero()).unwrap_or(false)
            })
    }

    /// Upper triangle (row-major, diagonal included) of a square matrix.
    pub fn upper_triangle(&self) -> Vec<Rational> {
        let mut v = Vec::with_capacity(self.rows * (self.rows + 1) / 2);
        for i in 0..self.rows {
            for j in i..self.cols {
                v.push(self.get(i, j).clone());
            }
        }
        v
    }

    /// Entries as strings, one vector per row.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(format_rational).collect())
            .collect()
    }

    /// Every row multiplied by the least common multiple of its denominators,
    /// then divided by the gcd of its entries.
    pub fn primitive_integer_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows)
            .map(|i| {
                let row = self.row(i);
                let d = Rational::from_integer(common_denominator(row));
                let ints: Vec<BigInt> = row.iter().map(|x| (x * &d).to_integer()).collect();
                let g = ints.iter().fold(BigInt::zero(), |g, x| num_integer::Integer::gcd(&g, x));
                if g.is_zero() {
                    ints
                } else {
                    ints.into_iter().map(|x| x / &g).collect()
                }
            })
            .collect()
    }
}

/// Bareiss elimination on a square integer matrix, destroying it.
pub(crate) fn bareiss_det(a: &mut [Vec<BigInt>]) -> BigInt {
    let n = a.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

impl Mul for &RatMatrix {
    type Output = RatMatrix;
    fn mul(self, rhs: &RatMatrix) -> RatMatrix {
        self.checked_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &RatMatrix {
    type Output = RatMatrix;
    fn add(self, rhs: &RatMatrix) -> RatMatrix {
        self.checked_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &RatMatrix {
    type Output = RatMatrix;
    fn sub(self, rhs: &RatMatrix) -> RatMatrix {
        self.checked_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl Neg for &RatMatrix {
    type Output = RatMatrix;
    fn neg(self) -> RatMatrix {
        self.scale(&int(-1))
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for row in self.to_strings() {
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Is `r` an integer (denominator one)?
pub fn is_integral(r: &Rational) -> bool {
    r.denom().is_one()
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rational::ratio;

    #[test]
    fn rref_identity_and_proportional_rows() {
        let id = RatMatrix::identity(3);
        let r = id.rref();
        assert_eq!(r.matrix, id);
        assert_eq!(r.rank, 3);

        let m = RatMatrix::from_i64_rows(&[[1, 2], [2, 4]]);
        let r = m.rref();
        assert_eq!(r.matrix, RatMatrix::from_i64_rows(&[[1, 2], [0, 0]]));
        assert_eq!(r.rank, 1);
        assert_eq!(r.pivots, vec![0]);
    }

    #[test]
    fn rref_of_paired_coordinate_rows() {
        // rows e_i + e_{i+4}, i = 0..4, in R^8
        let m = RatMatrix::from_fn(4, 8, |i, j| if j == i || j == i + 4 { int(1) } else { int(0) });
        let r = m.rref();
        assert_eq!(r.rank, 4);
        assert_eq!(r.pivots, vec![0, 1, 2, 3]);
        assert_eq!(r.matrix, m);
    }

    #[test]
    fn small_determinants() {
        assert_eq!(RatMatrix::from_i64_rows(&[[2, 1], [1, 2]]).det().unwrap(), int(3));
        assert_eq!(RatMatrix::identity(5).det().unwrap(), int(1));
        let m = RatMatrix::from_rows(vec![vec![ratio(1, 2), int(3)], vec![int(0), ratio(2, 3)]]).unwrap();
        assert_eq!(m.det().unwrap(), ratio(1, 3));
        let swap = RatMatrix::from_i64_rows(&[[0, 1], [1, 0]]);
        assert_eq!(swap.det().unwrap(), int(-1));
        assert!(RatMatrix::zeros(2, 3).det().is_err());
    }

    #[test]
    fn trace_powers() {
        assert_eq!(RatMatrix::identity(4).trace_pow(2).unwrap(), int(4));
        let p = RatMatrix::from_fn(4, 4, |i, j| if i == 0 && j == 0 { int(1) } else { int(0) });
        for t in 1..5 {
            assert_eq!(p.trace_pow(t).unwrap(), int(1));
        }
        assert!(p.trace_pow(0).is_err());
        // projector onto e1 times projector onto e1+e2, in R^4
        let q = RatMatrix::from_fn(4, 4, |i, j| if i < 2 && j < 2 { ratio(1, 2) } else { int(0) });
        let pq = &p * &q;
        assert_eq!(pq.trace_pow(1).unwrap(), ratio(1, 2));
        assert_eq!(pq.trace_pow(2).unwrap(), ratio(1, 4));
    }

    #[test]
    fn inverse_and_kernel() {
        let m = RatMatrix::from_i64_rows(&[[2, 1], [1, 2]]);
        let inv = m.inverse().unwrap();
        assert_eq!(&m * &inv, RatMatrix::identity(2));
        assert!(RatMatrix::from_i64_rows(&[[1, 2], [2, 4]]).inverse().is_err());

        let k = RatMatrix::from_i64_rows(&[[1, 1, 0], [0, 1, 1]]).kernel();
        assert_eq!(k.rows(), 1);
        assert_eq!(k.row(0), &[int(1), int(-1), int(1)]);
    }
}
