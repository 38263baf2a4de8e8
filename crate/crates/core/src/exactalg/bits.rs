//! Matrices over GF(2) with at most 64 columns, one word per row.

use crate::error::{Error, Result};

/// Column `j` of a row is bit `j` of its word.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<u64>,
}

fn mask(cols: usize) -> u64 {
    if cols == 64 {
        u64::MAX
    } else {
        (1u64 << cols) - 1
    }
}

impl BitMatrix {
    pub fn new(cols: usize, rows: Vec<u64>) -> Result<Self> {
        if cols > 64 {
            return Err(Error::InvalidArgument(format!("BitMatrix supports at most 64 columns, got {cols}")));
        }
        if rows.iter().any(|r| r & !mask(cols) != 0) {
            return Err(Error::InvalidArgument("bits set beyond column count".into()));
        }
        Ok(Self { cols, rows })
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Canonical reduced row echelon form (pivot = lowest set bit, rows sorted by pivot),
    /// zero rows dropped.
    pub fn rref(&self) -> Self {
        Self {
            cols: self.cols,
            rows: rref_words(self.rows.clone()),
        }
    }

    pub fn rank(&self) -> usize {
        rref_words(self.rows.clone()).len()
    }

    /// All `2^rank` vectors of the row space.
    pub fn span(&self) -> Vec<u64> {
        let basis = rref_words(self.rows.clone());
        let mut out = vec![0u64];
        for b in basis {
            let len = out.len();
            for i in 0..len {
                out.push(out[i] ^ b);
            }
        }
        out
    }

    /// Is `v` in the row space?
    pub fn contains(&self, v: u64) -> bool {
        reduce(&rref_words(self.rows.clone()), v) == 0
    }

    /// Coordinates of `v` with respect to the rows of an RREF matrix, if `v` lies in its span.
    pub fn coordinates(&self, v: u64) -> Option<u64> {
        let mut rem = v;
        let mut coords = 0u64;
        for (i, &r) in self.rows.iter().enumerate() {
            let p = r.trailing_zeros();
            if (rem >> p) & 1 == 1 {
                rem ^= r;
                coords |= 1 << i;
            }
        }
        (rem == 0).then_some(coords)
    }
}

/// Row reduce a list of words into canonical RREF.
pub fn rref_words(mut rows: Vec<u64>) -> Vec<u64> {
    let mut basis: Vec<u64> = Vec::new();
    for r in rows.drain(..) {
        let v = reduce(&basis, r);
        if v == 0 {
            continue;
        }
        let p = v.trailing_zeros();
        for b in basis.iter_mut() {
            if (*b >> p) & 1 == 1 {
                *b ^= v;
            }
        }
        basis.push(v);
    }
    basis.sort_by_key(|b| b.trailing_zeros());
    basis
}

fn reduce(basis: &[u64], mut v: u64) -> u64 {
    for &b in basis {
        let p = b.trailing_zeros();
        if (v >> p) & 1 == 1 {
            v ^= b;
        }
    }
    v
}

pub fn rank_words(rows: &[u64]) -> usize {
    rref_words(rows.to_vec()).len()
}

pub fn parity(v: u64) -> u32 {
    v.count_ones() & 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_stray_bits() {
        assert!(BitMatrix::new(3, vec![0b1000]).is_err());
        assert!(BitMatrix::new(65, vec![]).is_err());
        assert!(BitMatrix::new(64, vec![u64::MAX]).is_ok());
    }

    #[test]
    fn canonical_form_is_basis_independent() {
        let a = BitMatrix::new(4, vec![0b0011, 0b0110]).unwrap().rref();
        let b = BitMatrix::new(4, vec![0b0101, 0b0011, 0b0110]).unwrap().rref();
        assert_eq!(a, b);
        assert_eq!(a.row_count(), 2);
        assert_eq!(a.span().len(), 4);
        assert!(a.contains(0b0101));
        assert!(!a.contains(0b1000));
    }

    #[test]
    fn rank_of_words() {
        assert_eq!(rank_words(&[0b11, 0b01, 0b10]), 2);
        assert_eq!(rank_words(&[0, 0]), 0);
    }

    #[test]
    fn coordinates_in_rref_basis() {
        let m = BitMatrix::new(4, vec![0b0011, 0b1100]).unwrap().rref();
        let c = m.coordinates(0b1111).unwrap();
        assert_eq!(c, 0b11);
        assert!(m.coordinates(0b0001).is_none());
    }
}
