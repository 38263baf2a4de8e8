//! Integer row echelon forms, integer kernels, saturation, and an exact
//! rational-arithmetic LLL used to precondition enumeration.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::RatMatrix;
use super::rational::{ratio, Rational};

type IntRows = Vec<Vec<BigInt>>;

fn sub_multiple(target: &mut [BigInt], src: &[BigInt], q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for (t, s) in target.iter_mut().zip(src) {
        if !s.is_zero() {
            *t -= q * s;
        }
    }
}

/// Echelon form by unimodular row operations, reducing only the first
/// `reduce_cols` columns. Returns the transformed rows and the rank found in
/// those columns; rows past the rank are zero on the reduced columns.
pub fn echelon_rows(mut rows: IntRows, reduce_cols: usize) -> (IntRows, usize) {
    let mut r = 0;
    for c in 0..reduce_cols {
        if r == rows.len() {
            break;
        }
        loop {
            let pivot = (r..rows.len())
                .filter(|&i| !rows[i][c].is_zero())
                .min_by(|&a, &b| rows[a][c].abs().cmp(&rows[b][c].abs()));
            let Some(p) = pivot else { break };
            rows.swap(r, p);
            let (head, tail) = rows.split_at_mut(r + 1);
            let prow = &head[r];
            let mut done = true;
            for row in tail.iter_mut() {
                if row[c].is_zero() {
                    continue;
                }
                let q = row[c].div_floor(&prow[c]);
                sub_multiple(row, prow, &q);
                if !row[c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if rows[r][c].is_zero() {
            continue;
        }
        if rows[r][c].is_negative() {
            for v in rows[r].iter_mut() {
                *v = -&*v;
            }
        }
        let (head, tail) = rows.split_at_mut(r);
        let prow = &tail[0];
        for row in head.iter_mut() {
            let q = row[c].div_floor(&prow[c]);
            sub_multiple(row, prow, &q);
        }
        r += 1;
    }
    (rows, r)
}

/// Hermite normal form of the row lattice, zero rows dropped.
pub fn hnf_rows(rows: IntRows) -> IntRows {
    let ncols = rows.first().map_or(0, Vec::len);
    let (mut out, rank) = echelon_rows(rows, ncols);
    out.truncate(rank);
    out
}

/// A basis of `{ y in Z^n : a y^T = 0 }` for an integer matrix `a` with `n` columns.
pub fn integer_kernel(a: &[Vec<BigInt>], n: usize) -> IntRows {
    let r = a.len();
    let rows: IntRows = (0..n)
        .map(|i| {
            let mut row: Vec<BigInt> = a.iter().map(|ar| ar[i].clone()).collect();
            row.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let (ech, rank) = echelon_rows(rows, r);
    ech[rank..].iter().map(|row| row[r..].to_vec()).collect()
}

/// Basis of `span_Q(x) ∩ Z^n`: the primitive closure of the row lattice of `x`.
pub fn saturate(x: &[Vec<BigInt>]) -> IntRows {
    let n = x.first().map_or(0, Vec::len);
    let k = integer_kernel(x, n);
    if k.is_empty() {
        return identity_rows(n);
    }
    integer_kernel(&k, n)
}

fn identity_rows(n: usize) -> IntRows {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

/// Exact LLL reduction (parameter 3/4) of the lattice with Gram matrix `gram`.
/// Returns a unimodular `u` with `u gram u^T` reduced.
pub fn lll_gram(gram: &RatMatrix) -> IntRows {
    let n = gram.rows();
    let mut g: Vec<Vec<Rational>> = gram.row_vecs();
    let mut u = identity_rows(n);
    if n < 2 {
        return u;
    }
    let delta = ratio(3, 4);
    let half = ratio(1, 2);

    let gso = |g: &Vec<Vec<Rational>>| -> (Vec<Vec<Rational>>, Vec<Rational>) {
        let mut mu = vec![vec![Rational::zero(); n]; n];
        let mut b = vec![Rational::zero(); n];
        for i in 0..n {
            for j in 0..i {
                let mut v = g[i][j].clone();
                for k in 0..j {
                    v -= &mu[j][k] * &mu[i][k] * &b[k];
                }
                mu[i][j] = v / &b[j];
            }
            let mut v = g[i][i].clone();
            for k in 0..i {
                v -= &mu[i][k] * &mu[i][k] * &b[k];
            }
            b[i] = v;
        }
        (mu, b)
    };

    let (mut mu, mut b) = gso(&g);
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            if mu[k][j].abs() <= half {
                continue;
            }
            let q = mu[k][j].round().to_integer();
            let qr = Rational::from_integer(q.clone());
            // b_k <- b_k - q b_j
            let ukj = u[j].clone();
            sub_multiple(&mut u[k], &ukj, &q);
            let gkk = &g[k][k] - int2(&qr) * &g[k][j] + &qr * &qr * &g[j][j];
            for i in 0..n {
                if i != k {
                    let v = &g[k][i] - &qr * &g[j][i];
                    g[k][i] = v.clone();
                    g[i][k] = v;
                }
            }
            g[k][k] = gkk;
            for i in 0..j {
                let v = &mu[k][i] - &qr * &mu[j][i];
                mu[k][i] = v;
            }
            mu[k][j] = &mu[k][j] - &qr;
        }
        let lhs = b[k].clone();
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &b[k - 1];
        if lhs >= rhs {
            k += 1;
        } else {
            u.swap(k, k - 1);
            g.swap(k, k - 1);
            for row in g.iter_mut() {
                row.swap(k, k - 1);
            }
            let (m2, b2) = gso(&g);
            mu = m2;
            b = b2;
            k = k.saturating_sub(1).max(1);
        }
    }
    u
}

fn int2(q: &Rational) -> Rational {
    q * Rational::from_integer(BigInt::from(2))
}

/// `u m` for an integer matrix `u` and rational `m`.
pub fn int_times(u: &[Vec<BigInt>], m: &RatMatrix) -> RatMatrix {
    let ur = RatMatrix::from_fn(u.len(), m.rows(), |i, j| Rational::from_integer(u[i][j].clone()));
    &ur * m
}
