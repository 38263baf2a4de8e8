//! Exact two-phase simplex over the rationals (Bland's rule), and the
//! nonnegative / strictly positive combination solver built on it.

use num_traits::{Signed, Zero};

use super::matrix::RatMatrix;
use super::rational::{int, Rational};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { x: Vec<Rational>, value: Rational },
}

struct Tableau {
    /// rows of `[A | b]`
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            *v *= &inv;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, p) in row.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        self.basis[r] = c;
    }

    fn rhs(&self, r: usize) -> &Rational {
        &self.rows[r][self.ncols]
    }

    /// Maximizes `cost . x` over columns `allowed`; returns false when unbounded.
    fn optimize(&mut self, cost: &[Rational], allowed: &[bool]) -> bool {
        loop {
            // reduced cost c_j - c_B B^-1 A_j
            let mut entering = None;
            for j in 0..self.ncols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut z = Rational::zero();
                for (i, &b) in self.basis.iter().enumerate() {
                    let a = &self.rows[i][j];
                    if !a.is_zero() && !cost[b].is_zero() {
                        z += &cost[b] * a;
                    }
                }
                if (&cost[j] - z).is_positive() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else {
                return false;
            };
            self.pivot(r, c);
        }
    }

    fn solution(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            x[b] = self.rhs(i).clone();
        }
        x
    }
}

/// Maximize `cost . x` subject to `a x = b`, `x >= 0`.
pub fn simplex(a: &[Vec<Rational>], b: &[Rational], cost: &[Rational]) -> LpOutcome {
    let m = a.len();
    let n = cost.len();
    // phase one: artificial columns n..n+m
    let total = n + m;
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row: Vec<Rational> = a[i].iter().map(|v| if flip { -v.clone() } else { v.clone() }).collect();
        row.extend((0..m).map(|k| if k == i { int(1) } else { Rational::zero() }));
        row.push(if flip { -b[i].clone() } else { b[i].clone() });
        rows.push(row);
    }
    let mut tab = Tableau {
        rows,
        basis: (n..total).collect(),
        ncols: total,
    };
    let phase1: Vec<Rational> = (0..total).map(|j| if j >= n { int(-1) } else { Rational::zero() }).collect();
    let all = vec![true; total];
    tab.optimize(&phase1, &all);
    let infeas: Rational = tab
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &bj)| bj >= n)
        .map(|(i, _)| tab.rhs(i).clone())
        .sum();
    if infeas.is_positive() {
        return LpOutcome::Infeasible;
    }
    // drive zero-level artificials out of the basis, dropping redundant rows
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= n {
            if let Some(c) = (0..n).find(|&j| !tab.rows[r][j].is_zero()) {
                tab.pivot(r, c);
                r += 1;
            } else {
                tab.rows.remove(r);
                tab.basis.remove(r);
            }
        } else {
            r += 1;
        }
    }
    let mut cost2 = cost.to_vec();
    cost2.extend((0..m).map(|_| Rational::zero()));
    let allowed: Vec<bool> = (0..total).map(|j| j < n).collect();
    if !tab.optimize(&cost2, &allowed) {
        return LpOutcome::Unbounded;
    }
    let mut x = tab.solution();
    x.truncate(n);
    let value = x.iter().zip(cost).map(|(xi, ci)| xi * ci).sum();
    LpOutcome::Optimal { x, value }
}

/// Finds `lambda >= 0` (or `> 0` when `strict`) with `sum lambda_i targets[i] = goal`.
///
/// Strict feasibility maximizes the smallest weight (capped at 1) and succeeds iff
/// the optimum is positive.
pub fn solve_nonneg_combination(targets: &[RatMatrix], goal: &RatMatrix, strict: bool) -> Result<Option<Vec<Rational>>> {
    for t in targets {
        if t.shape() != goal.shape() {
            return Err(Error::ShapeMismatch {
                op: "solve_nonneg_combination",
                left: t.shape(),
                right: goal.shape(),
            });
        }
    }
    let symmetric = goal.is_symmetric() && targets.iter().all(RatMatrix::is_symmetric);
    let flatten = |m: &RatMatrix| -> Vec<Rational> {
        if symmetric {
            m.upper_triangle()
        } else {
            m.entries().to_vec()
        }
    };
    let cols: Vec<Vec<Rational>> = targets.iter().map(flatten).collect();
    let rhs_full = flatten(goal);
    let k = targets.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (e, rhs) in rhs_full.iter().enumerate() {
        let row: Vec<Rational> = cols.iter().map(|c| c[e].clone()).collect();
        if row.iter().all(Zero::is_zero) {
            if !rhs.is_zero() {
                return Ok(None);
            }
            continue;
        }
        a.push(row);
        b.push(rhs.clone());
    }
    if !strict {
        let cost = vec![Rational::zero(); k];
        return Ok(match simplex(&a, &b, &cost) {
            LpOutcome::Optimal { x, .. } => Some(x),
            _ => None,
        });
    }
    // variables: tau, mu_1..mu_k, slack; lambda_i = tau + mu_i
    let nvar = k + 2;
    let mut a2: Vec<Vec<Rational>> = a
        .iter()
        .map(|row| {
            let mut r = Vec::with_capacity(nvar);
            r.push(row.iter().sum());
            r.extend(row.iter().cloned());
            r.push(Rational::zero());
            r
        })
        .collect();
    let mut cap = vec![Rational::zero(); nvar];
    cap[0] = int(1);
    cap[nvar - 1] = int(1);
    a2.push(cap);
    let mut b2 = b;
    b2.push(int(1));
    let mut cost = vec![Rational::zero(); nvar];
    cost[0] = int(1);
    match simplex(&a2, &b2, &cost) {
        LpOutcome::Optimal { x, value } if value.is_positive() => {
            let tau = &x[0];
            Ok(Some((1..=k).map(|i| tau + &x[i]).collect()))
        }
        _ => Ok(None),
    }
}
