//! Lattices given by a Gram matrix (and a basis when one is rational),
//! exact short-vector enumeration, minimal m-sections, Rankin invariants,
//! perfection and eutaxy, and the Barnes-Wall lattices.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactalg::integer::{hnf_rows, int_times, lll_gram, saturate};
use crate::exactalg::rational::{common_denominator, int, to_f64, Rational};
use crate::exactalg::{solve_nonneg_combination, RatMatrix};
use crate::grassmann::{Configuration, RationalField, Subspace};

/// Integer coordinates of a lattice vector with respect to the lattice basis.
pub type Coords = Vec<BigInt>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    name: Option<String>,
    gram: RatMatrix,
    basis: Option<RatMatrix>,
}

impl Lattice {
    /// Lattice spanned by the (independent) rows of `basis`.
    pub fn from_basis(basis: RatMatrix) -> Result<Self> {
        let gram = &basis * &basis.transpose();
        if basis.rank() != basis.rows() || basis.rows() == 0 {
            return Err(Error::InvalidArgument("lattice basis rows must be independent".into()));
        }
        Ok(Self {
            name: None,
            gram,
            basis: Some(basis),
        })
    }

    /// Abstract lattice known only through its Gram matrix.
    pub fn from_gram(gram: RatMatrix) -> Result<Self> {
        if !gram.is_positive_definite() {
            return Err(Error::InvalidArgument("Gram matrix must be symmetric positive definite".into()));
        }
        Ok(Self {
            name: None,
            gram,
            basis: None,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn n(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &RatMatrix {
        &self.gram
    }

    pub fn basis(&self) -> Option<&RatMatrix> {
        self.basis.as_ref()
    }

    pub fn det(&self) -> Rational {
        self.gram.det().expect("Gram matrix is square")
    }

    pub fn is_integral(&self) -> bool {
        self.gram.entries().iter().all(|x| x.is_integer())
    }

    pub fn is_even(&self) -> bool {
        self.is_integral() && (0..self.n()).all(|i| self.gram.get(i, i).to_integer().is_even())
    }

    /// Same lattice with every norm multiplied by `f > 0`. The basis survives
    /// only when `f` is the square of a rational.
    pub fn rescaled(&self, f: &Rational) -> Result<Self> {
        if !f.is_positive() {
            return Err(Error::InvalidArgument("scale factor must be positive".into()));
        }
        let basis = match (&self.basis, rational_sqrt(f)) {
            (Some(b), Some(r)) => Some(b.scale(&r)),
            _ => None,
        };
        Ok(Self {
            name: self.name.clone(),
            gram: self.gram.scale(f),
            basis,
        })
    }

    /// Same lattice in the basis `u B` for an integer matrix `u` of determinant +-1.
    pub fn transformed(&self, u: &[Vec<i64>]) -> Result<Self> {
        let um = RatMatrix::from_i64_rows(u);
        if um.shape() != (self.n(), self.n()) || um.det()?.abs() != Rational::one() {
            return Err(Error::InvalidArgument("transform must be unimodular".into()));
        }
        Ok(Self {
            name: self.name.clone(),
            gram: &(&um * &self.gram) * &um.transpose(),
            basis: self.basis.as_ref().map(|b| &um * b),
        })
    }

    pub fn norm(&self, v: &[BigInt]) -> Rational {
        let mut s = Rational::zero();
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (j, vj) in v.iter().enumerate() {
                if !vj.is_zero() {
                    s += self.gram.get(i, j) * Rational::from_integer(vi * vj);
                }
            }
        }
        s
    }

    /// Minimal norm of a nonzero vector.
    pub fn minimum(&self) -> Rational {
        let u = lll_gram(&self.gram);
        let ur = int_times(&u, &self.gram);
        let reduced = &ur * &RatMatrix::from_fn(self.n(), self.n(), |i, j| Rational::from_integer(u[j][i].clone()));
        let cap = (0..self.n()).map(|i| reduced.get(i, i).clone()).min().expect("nonempty lattice");
        short_vectors(self, &cap, true)
            .iter()
            .map(|v| self.norm(v))
            .min()
            .expect("a basis vector reaches the cap")
    }

    /// Vectors of minimal norm, one per +- pair when `half`.
    pub fn minimal_vectors(&self, half: bool) -> Vec<Coords> {
        let min = self.minimum();
        short_vectors(self, &min, half)
    }
}

fn rational_sqrt(f: &Rational) -> Option<Rational> {
    let (p, q) = (f.numer(), f.denom());
    if p.is_negative() {
        return None;
    }
    let (rp, rq) = (p.sqrt(), q.sqrt());
    (&rp * &rp == *p && &rq * &rq == *q).then(|| Rational::new(rp, rq))
}

fn rational_nth_root(f: &Rational, n: u32) -> Option<Rational> {
    let (p, q) = (f.numer(), f.denom());
    if p.is_negative() {
        return None;
    }
    let (rp, rq) = (p.nth_root(n), q.nth_root(n));
    (num_traits::pow(rp.clone(), n as usize) == *p && num_traits::pow(rq.clone(), n as usize) == *q)
        .then(|| Rational::new(rp, rq))
}

/// Data for `Q(x) = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2`.
fn quadratic_completion(g: &RatMatrix) -> Vec<Vec<Rational>> {
    let n = g.rows();
    let mut q = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        let mut d = g.get(i, i).clone();
        for k in 0..i {
            d -= &q[k][k] * &q[k][i] * &q[k][i];
        }
        q[i][i] = d;
        for j in i + 1..n {
            let mut v = g.get(i, j).clone();
            for k in 0..i {
                v -= &q[k][k] * &q[k][i] * &q[k][j];
            }
            q[i][j] = v / &q[i][i];
        }
    }
    q
}

fn floor_sqrt(r: &Rational) -> BigInt {
    if !r.is_positive() {
        return BigInt::zero();
    }
    r.floor().to_integer().sqrt()
}

struct Enumerator<'a> {
    q: &'a [Vec<Rational>],
    n: usize,
}

impl Enumerator<'_> {
    /// Candidate values of `x_i` given the coordinates above `i`.
    fn range(&self, i: usize, x: &[BigInt], remaining: &Rational, nonneg: bool) -> Vec<(BigInt, Rational)> {
        let mut c = Rational::zero();
        for j in i + 1..self.n {
            if !x[j].is_zero() {
                c += &self.q[i][j] * Rational::from_integer(x[j].clone());
            }
        }
        let s = floor_sqrt(&(remaining / &self.q[i][i]));
        let mut lo: BigInt = (-&c).floor().to_integer() - &s - 1;
        let hi: BigInt = (-&c).ceil().to_integer() + &s + 1;
        if nonneg && lo.is_negative() {
            lo = BigInt::zero();
        }
        let mut out = Vec::new();
        let mut v = lo;
        while v <= hi {
            let shifted = Rational::from_integer(v.clone()) + &c;
            let cost = &self.q[i][i] * &shifted * &shifted;
            if cost <= *remaining {
                out.push((v.clone(), remaining - cost));
            }
            v += 1;
        }
        out
    }

    fn walk(&self, i: usize, x: &mut Vec<BigInt>, remaining: &Rational, above_zero: bool, out: &mut Vec<Coords>) {
        for (v, rest) in self.range(i, x, remaining, above_zero) {
            let zero_here = above_zero && v.is_zero();
            x[i] = v;
            if i == 0 {
                if !zero_here {
                    out.push(x.clone());
                }
            } else {
                self.walk(i - 1, x, &rest, zero_here, out);
            }
        }
        x[i] = BigInt::zero();
    }
}

/// All nonzero lattice vectors of norm `<= bound`, as coordinates in the
/// lattice basis. With `half`, only the representative whose last nonzero
/// coordinate (in an internal reduced basis) is positive is kept.
pub fn short_vectors(l: &Lattice, bound: &Rational, half: bool) -> Vec<Coords> {
    let n = l.n();
    if !bound.is_positive() {
        return Vec::new();
    }
    let u = lll_gram(&l.gram);
    let ur = int_times(&u, &l.gram);
    let reduced = &ur * &RatMatrix::from_fn(n, n, |i, j| Rational::from_integer(u[j][i].clone()));
    let q = quadratic_completion(&reduced);
    let en = Enumerator { q: &q, n };
    let top = en.range(n - 1, &vec![BigInt::zero(); n], bound, true);
    let found: Vec<Coords> = top
        .into_par_iter()
        .flat_map_iter(|(v, rest)| {
            let mut x = vec![BigInt::zero(); n];
            let zero = v.is_zero();
            x[n - 1] = v;
            let mut out = Vec::new();
            if n == 1 {
                if !zero {
                    out.push(x);
                }
            } else {
                en.walk(n - 2, &mut x, &rest, zero, &mut out);
            }
            out
        })
        .collect();
    let mut result: Vec<Coords> = Vec::with_capacity(if half { found.len() } else { 2 * found.len() });
    for y in found {
        let coords: Coords = (0..n)
            .map(|j| y.iter().zip(&u).map(|(yi, ui)| yi * &ui[j]).sum())
            .collect();
        if !half {
            result.push(coords.iter().map(|c| -c).collect());
        }
        result.push(coords);
    }
    result
}

/// The minimal m-sections found among vectors of norm `<= search_bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionSet {
    pub m: usize,
    pub delta: Rational,
    pub search_bound: Rational,
    /// spans in lattice coordinates
    pub sections: Vec<Subspace>,
    /// for each section, a basis of `p ∩ L` (integer coordinates, m x n)
    pub witness_bases: Vec<RatMatrix>,
    /// Gram matrices of the witness bases; each has determinant `delta`
    pub witness_grams: Vec<RatMatrix>,
    /// number of +- representatives examined
    pub vectors_examined: usize,
}

impl SectionSet {
    pub fn len(&self) -> usize {
        self.sections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    /// The sections as a configuration: ambient coordinates when the lattice
    /// has a rational basis, lattice coordinates with the Gram metric otherwise.
    pub fn configuration(&self, l: &Lattice) -> Result<Configuration> {
        match l.basis() {
            Some(b) => {
                let pts = self
                    .witness_bases
                    .iter()
                    .map(|w| Subspace::new(&(w * b)))
                    .collect::<Result<Vec<_>>>()?;
                Configuration::new(pts)
            }
            None => Configuration::with_metric(self.sections.clone(), l.gram().clone()),
        }
    }

    /// Sum over sections of `X^T (X G X^T)^-1 X`, the lattice-coordinate form of the projectors.
    fn coordinate_projectors(&self, l: &Lattice) -> Vec<RatMatrix> {
        self.witness_bases
            .par_iter()
            .map(|x| {
                let g = &(x * l.gram()) * &x.transpose();
                &(&x.transpose() * &g.inverse().expect("section Gram is definite")) * x
            })
            .collect()
    }
}

/// Default search bound `m * min(L)`.
pub fn default_search_bound(l: &Lattice, m: usize) -> Rational {
    l.minimum() * int(m as i64)
}

const GENERAL_COMBINATION_CAP: usize = 5_000_000;

/// Minimal m-sections among rank-m sublattices spanned by vectors of norm
/// `<= search_bound` (default `m * min(L)`). The result is complete relative
/// to that bound.
pub fn minimal_sections(l: &Lattice, m: usize, search_bound: Option<Rational>) -> Result<SectionSet> {
    let n = l.n();
    if m < 1 || 2 * m > n {
        return Err(Error::InvalidArgument(format!("section rank {m} outside 1..={}", n / 2)));
    }
    let bound = match search_bound {
        Some(b) if b.is_positive() => b,
        Some(_) => return Err(Error::InvalidArgument("search bound must be positive".into())),
        None => default_search_bound(l, m),
    };
    let reps = short_vectors(l, &bound, true);
    let examined = reps.len();
    if reps.is_empty() {
        return Err(Error::NotFound("no lattice vectors within the search bound".into()));
    }
    let candidates: Vec<Vec<Coords>> = match m {
        1 => {
            let norms: Vec<Rational> = reps.iter().map(|v| l.norm(v)).collect();
            let min = norms.iter().min().expect("nonempty").clone();
            reps.into_iter()
                .zip(norms)
                .filter(|(_, nv)| *nv == min)
                .map(|(v, _)| vec![v])
                .collect()
        }
        2 => minimal_pairs(l, &reps)?,
        _ => minimal_tuples(l, &reps, m)?,
    };
    let mut seen: HashMap<Subspace, usize> = HashMap::new();
    let mut set = SectionSet {
        m,
        delta: Rational::zero(),
        search_bound: bound,
        sections: Vec::new(),
        witness_bases: Vec::new(),
        witness_grams: Vec::new(),
        vectors_examined: examined,
    };
    for tuple in candidates {
        let x = RatMatrix::from_fn(m, n, |i, j| Rational::from_integer(tuple[i][j].clone()));
        let span = Subspace::new(&x)?;
        if seen.contains_key(&span) {
            continue;
        }
        let sat = saturate(&tuple);
        let w = RatMatrix::from_fn(m, n, |i, j| Rational::from_integer(sat[i][j].clone()));
        let gram = &(&w * l.gram()) * &w.transpose();
        seen.insert(span.clone(), set.sections.len());
        set.delta = gram.det()?;
        set.sections.push(span);
        set.witness_bases.push(w);
        set.witness_grams.push(gram);
    }
    Ok(set)
}

fn to_i64_rows(reps: &[Coords]) -> Result<Vec<Vec<i64>>> {
    reps.iter()
        .map(|v| v.iter().map(|c| c.to_i64()).collect::<Option<Vec<_>>>())
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Unsupported("vector coordinates exceed 64 bits".into()))
}

fn scaled_gram(l: &Lattice) -> Result<Vec<Vec<i128>>> {
    let d = Rational::from_integer(common_denominator(l.gram().entries()));
    (0..l.n())
        .map(|i| {
            l.gram()
                .row(i)
                .iter()
                .map(|x| (x * &d).to_integer().to_i128())
                .collect::<Option<Vec<_>>>()
        })
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Unsupported("Gram entries exceed 128 bits".into()))
}

/// Pairs (as coordinate tuples) whose saturated span has the least determinant.
fn minimal_pairs(l: &Lattice, reps: &[Coords]) -> Result<Vec<Vec<Coords>>> {
    let xs = to_i64_rows(reps)?;
    let g = scaled_gram(l)?;
    let n = l.n();
    let xg: Vec<Vec<i128>> = xs
        .iter()
        .map(|x| (0..n).map(|j| (0..n).map(|k| x[k] as i128 * g[k][j]).sum()).collect())
        .collect();
    let norms: Vec<i128> = xs
        .iter()
        .zip(&xg)
        .map(|(x, y)| x.iter().zip(y).map(|(a, b)| *a as i128 * b).sum())
        .collect();
    let (best, pairs) = (0..xs.len())
        .into_par_iter()
        .fold(
            || (i128::MAX, Vec::<(usize, usize)>::new()),
            |(mut best, mut pairs), i| {
                for j in i + 1..xs.len() {
                    let b: i128 = xg[i].iter().zip(&xs[j]).map(|(a, c)| a * *c as i128).sum();
                    let det = norms[i] * norms[j] - b * b;
                    if det == 0 || det > best {
                        continue;
                    }
                    let mut gcd = 0i128;
                    for s in 0..n {
                        for t in s + 1..n {
                            let minor = xs[i][s] as i128 * xs[j][t] as i128 - xs[i][t] as i128 * xs[j][s] as i128;
                            gcd = gcd.gcd(&minor);
                        }
                    }
                    let sat = det / (gcd * gcd);
                    if sat < best {
                        best = sat;
                        pairs.clear();
                    }
                    if sat == best {
                        pairs.push((i, j));
                    }
                }
                (best, pairs)
            },
        )
        .reduce(
            || (i128::MAX, Vec::new()),
            |(b1, mut p1), (b2, p2)| match b1.cmp(&b2) {
                std::cmp::Ordering::Less => (b1, p1),
                std::cmp::Ordering::Greater => (b2, p2),
                std::cmp::Ordering::Equal => {
                    p1.extend(p2);
                    (b1, p1)
                }
            },
        );
    if pairs.is_empty() {
        return Err(Error::NotFound("no independent pair within the search bound".into()));
    }
    let _ = best;
    let mut pairs = pairs;
    pairs.sort_unstable();
    Ok(pairs.into_iter().map(|(i, j)| vec![reps[i].clone(), reps[j].clone()]).collect())
}

/// General rank: exhaustive independent m-tuples, capped.
fn minimal_tuples(l: &Lattice, reps: &[Coords], m: usize) -> Result<Vec<Vec<Coords>>> {
    let n = l.n();
    let mut best: Option<Rational> = None;
    let mut winners: Vec<Vec<Coords>> = Vec::new();
    let mut visited = 0usize;
    let mut stack: Vec<usize> = Vec::with_capacity(m);
    fn rank_of(rows: &[&Coords], n: usize) -> usize {
        RatMatrix::from_fn(rows.len(), n, |i, j| Rational::from_integer(rows[i][j].clone())).rank()
    }
    fn rec(
        l: &Lattice,
        reps: &[Coords],
        m: usize,
        n: usize,
        start: usize,
        stack: &mut Vec<usize>,
        best: &mut Option<Rational>,
        winners: &mut Vec<Vec<Coords>>,
        visited: &mut usize,
    ) -> Result<()> {
        if stack.len() == m {
            *visited += 1;
            if *visited > GENERAL_COMBINATION_CAP {
                return Err(Error::CapExceeded {
                    cap: GENERAL_COMBINATION_CAP,
                });
            }
            let tuple: Vec<Coords> = stack.iter().map(|&i| reps[i].clone()).collect();
            let sat = saturate(&tuple);
            let w = RatMatrix::from_fn(m, n, |i, j| Rational::from_integer(sat[i][j].clone()));
            let det = (&(&w * l.gram()) * &w.transpose()).det()?;
            match best {
                Some(b) if det > *b => {}
                Some(b) if det == *b => winners.push(tuple),
                _ => {
                    *best = Some(det);
                    winners.clear();
                    winners.push(tuple);
                }
            }
            return Ok(());
        }
        for i in start..reps.len() {
            stack.push(i);
            let rows: Vec<&Coords> = stack.iter().map(|&k| &reps[k]).collect();
            if rank_of(&rows, n) == stack.len() {
                rec(l, reps, m, n, i + 1, stack, best, winners, visited)?;
            }
            stack.pop();
        }
        Ok(())
    }
    rec(l, reps, m, n, 0, &mut stack, &mut best, &mut winners, &mut visited)?;
    if winners.is_empty() {
        return Err(Error::NotFound("no independent tuple within the search bound".into()));
    }
    Ok(winners)
}

/// `gamma_m(L) = delta_m / det(L)^(m/n)`, kept exact through `gamma^n = delta^n / det^m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankinValue {
    pub m: usize,
    pub n: usize,
    #[serde(with = "crate::exactalg::rational::serde_rational")]
    pub delta_m: Rational,
    #[serde(with = "crate::exactalg::rational::serde_rational")]
    pub det_l: Rational,
    /// `gamma_m^n`
    #[serde(with = "crate::exactalg::rational::serde_rational")]
    pub gamma_pow_n: Rational,
    /// `gamma_m` itself when it is rational
    #[serde(serialize_with = "serialize_opt_rational")]
    pub gamma_exact: Option<Rational>,
    pub gamma_m: f64,
}

fn serialize_opt_rational<S: serde::Serializer>(v: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_some(&crate::exactalg::format_rational(r)),
        None => s.serialize_none(),
    }
}

pub fn rankin_from(l: &Lattice, sections: &SectionSet) -> RankinValue {
    let n = l.n();
    let m = sections.m;
    let det = l.det();
    let gamma_pow_n = num_traits::pow(sections.delta.clone(), n) / num_traits::pow(det.clone(), m);
    let gamma_exact = rational_nth_root(&gamma_pow_n, n as u32);
    let gamma_m = to_f64(&sections.delta) / to_f64(&det).powf(m as f64 / n as f64);
    RankinValue {
        m,
        n,
        delta_m: sections.delta.clone(),
        det_l: det,
        gamma_pow_n,
        gamma_exact,
        gamma_m,
    }
}

pub fn rankin(l: &Lattice, m: usize) -> Result<RankinValue> {
    Ok(rankin_from(l, &minimal_sections(l, m, None)?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PerfectionReport {
    pub rank: usize,
    pub required: usize,
    pub is_perfect: bool,
}

/// Dimension of the span of the section projectors inside symmetric matrices.
pub fn check_perfection(l: &Lattice, sections: &SectionSet) -> PerfectionReport {
    let n = l.n();
    let required = n * (n + 1) / 2;
    let rows: Vec<Vec<Rational>> = sections
        .coordinate_projectors(l)
        .iter()
        .map(RatMatrix::upper_triangle)
        .collect();
    let mut basis: Vec<Vec<Rational>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for mut r in rows {
        for (b, &p) in basis.iter().zip(&pivots) {
            if !r[p].is_zero() {
                let f = r[p].clone();
                for (x, y) in r.iter_mut().zip(b) {
                    *x -= &f * y;
                }
            }
        }
        if let Some(p) = r.iter().position(|x| !x.is_zero()) {
            let inv = r[p].recip();
            for x in r.iter_mut() {
                *x *= &inv;
            }
            for (b, _) in basis.iter_mut().zip(&pivots) {
                if !b[p].is_zero() {
                    let f = b[p].clone();
                    for (x, y) in b.iter_mut().zip(&r) {
                        *x -= &f * y;
                    }
                }
            }
            basis.push(r);
            pivots.push(p);
            if basis.len() == required {
                break;
            }
        }
    }
    PerfectionReport {
        rank: basis.len(),
        required,
        is_perfect: basis.len() == required,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EutaxyReport {
    pub is_eutactic: bool,
    pub uniform: bool,
    #[serde(skip)]
    pub weights: Option<Vec<Rational>>,
}

/// Strictly positive `lambda_p` with `sum lambda_p pr_p = Id`, uniform weights tried first.
pub fn check_eutaxy(l: &Lattice, sections: &SectionSet) -> Result<EutaxyReport> {
    let projs = sections.coordinate_projectors(l);
    let goal = l.gram().inverse()?;
    let total = projs
        .iter()
        .skip(1)
        .fold(projs[0].clone(), |acc, p| &acc + p);
    let (i, j) = (0..goal.rows())
        .flat_map(|i| (0..goal.cols()).map(move |j| (i, j)))
        .find(|&(i, j)| !goal.get(i, j).is_zero())
        .expect("inverse Gram is nonzero");
    let c = total.get(i, j) / goal.get(i, j);
    if c.is_positive() && total == goal.scale(&c) {
        let w = c.recip();
        return Ok(EutaxyReport {
            is_eutactic: true,
            uniform: true,
            weights: Some(vec![w; projs.len()]),
        });
    }
    let weights = solve_nonneg_combination(&projs, &goal, true)?;
    Ok(EutaxyReport {
        is_eutactic: weights.is_some(),
        uniform: false,
        weights,
    })
}

/// Raw Barnes-Wall lattice in Z^(2^k): the span of
/// `2^floor((k-d+1)/2) * sum_{u in U} e_u` over affine subspaces `U` of dimension `d`.
pub fn barnes_wall(k: usize) -> Result<Lattice> {
    if !(2..=4).contains(&k) {
        return Err(Error::InvalidArgument(format!("Barnes-Wall parameter k = {k} outside 2..=4")));
    }
    let n = 1usize << k;
    let generators: Vec<Vec<BigInt>> = affine_subspaces(k)
        .into_iter()
        .map(|(mask, d)| {
            let c = BigInt::one() << (k - d).div_ceil(2);
            (0..n)
                .map(|u| if mask >> u & 1 == 1 { c.clone() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let basis = hnf_rows(generators);
    let b = RatMatrix::from_fn(n, n, |i, j| Rational::from_integer(basis[i][j].clone()));
    Ok(Lattice::from_basis(b)?.with_name(format!("BW{n}-raw")))
}

/// Norm factor between the raw lattice and the normalization with `min = 2^floor(k/2)`.
pub fn barnes_wall_scale(k: usize) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k.div_ceil(2))
}

pub fn barnes_wall_normalized(k: usize) -> Result<Lattice> {
    Ok(barnes_wall(k)?
        .rescaled(&barnes_wall_scale(k))?
        .with_name(format!("BW{}", 1usize << k)))
}

/// Affine subspaces of GF(2)^k as point masks, with their dimension.
fn affine_subspaces(k: usize) -> Vec<(u64, usize)> {
    let n = 1usize << k;
    let mut linear: HashSet<u64> = HashSet::new();
    linear.insert(1);
    let mut frontier: Vec<u64> = vec![1];
    let mut out: Vec<(u64, usize)> = Vec::new();
    for d in 0..=k {
        let mut next = Vec::new();
        for &mask in &frontier {
            // cosets
            let mut cosets: HashSet<u64> = HashSet::new();
            for a in 0..n {
                let shifted = (0..n)
                    .filter(|u| mask >> u & 1 == 1)
                    .fold(0u64, |acc, u| acc | 1 << (u ^ a));
                cosets.insert(shifted);
            }
            out.extend(cosets.into_iter().map(|c| (c, d)));
            // extend by one vector
            for v in 0..n {
                if mask >> v & 1 == 1 {
                    continue;
                }
                let bigger = (0..n)
                    .filter(|u| mask >> u & 1 == 1)
                    .fold(mask, |acc, u| acc | 1 << (u ^ v));
                if linear.insert(bigger) {
                    next.push(bigger);
                }
            }
        }
        frontier = next;
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn cartan_gram(edges: &[(usize, usize)], n: usize) -> RatMatrix {
    let mut g = RatMatrix::from_fn(n, n, |i, j| if i == j { int(2) } else { Rational::zero() });
    for &(a, b) in edges {
        g.set(a, b, int(-1));
        g.set(b, a, int(-1));
    }
    g
}

/// Built-in lattices: `Z<n>`, `D4`, `E6`, `E7`, `E8`, `BW4`, `BW8`, `BW16`.
pub fn catalog(name: &str) -> Result<Lattice> {
    let key = name.trim().to_ascii_uppercase();
    let lattice = match key.as_str() {
        "D4" => Lattice::from_basis(RatMatrix::from_i64_rows(&[
            [1, -1, 0, 0],
            [0, 1, -1, 0],
            [0, 0, 1, -1],
            [0, 0, 1, 1],
        ]))?,
        "E6" => Lattice::from_gram(cartan_gram(&[(0, 2), (2, 3), (3, 4), (4, 5), (1, 3)], 6))?,
        "E7" => Lattice::from_gram(cartan_gram(&[(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 3)], 7))?,
        "E8" => {
            let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(8);
            let mut first = vec![Rational::zero(); 8];
            first[0] = int(2);
            rows.push(first);
            for i in 0..6 {
                let mut r = vec![Rational::zero(); 8];
                r[i] = int(-1);
                r[i + 1] = int(1);
                rows.push(r);
            }
            rows.push(vec![Rational::new(BigInt::one(), BigInt::from(2)); 8]);
            Lattice::from_basis(RatMatrix::from_rows(rows)?)?
        }
        "BW4" => barnes_wall_normalized(2)?,
        "BW8" => barnes_wall_normalized(3)?,
        "BW16" => barnes_wall_normalized(4)?,
        _ => match key.strip_prefix('Z').and_then(|d| d.parse::<usize>().ok()) {
            Some(n) if (1..=64).contains(&n) => Lattice::from_basis(RatMatrix::identity(n))?,
            _ => return Err(Error::NotFound(format!("unknown lattice {name:?}"))),
        },
    };
    Ok(lattice.with_name(key))
}

/// Lattice JSON: `{ "name"?, "basis": [[...]] }` or `{ "name"?, "gram": [[...]] }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<RationalField>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<RationalField>>>,
}

fn rows_of(m: &RatMatrix) -> Vec<Vec<RationalField>> {
    m.row_vecs()
        .into_iter()
        .map(|r| r.into_iter().map(RationalField).collect())
        .collect()
}

fn matrix_of(rows: &[Vec<RationalField>]) -> Result<RatMatrix> {
    RatMatrix::from_rows(rows.iter().map(|r| r.iter().map(|x| x.0.clone()).collect()).collect())
}

impl Lattice {
    pub fn to_json(&self) -> LatticeJson {
        LatticeJson {
            name: self.name.clone(),
            basis: self.basis.as_ref().map(rows_of),
            gram: self.basis.is_none().then(|| rows_of(&self.gram)),
        }
    }

    pub fn from_json(doc: &LatticeJson) -> Result<Self> {
        let l = match (&doc.basis, &doc.gram) {
            (Some(b), _) => Self::from_basis(matrix_of(b)?)?,
            (None, Some(g)) => Self::from_gram(matrix_of(g)?)?,
            (None, None) => return Err(Error::Parse("lattice needs \"basis\" or \"gram\"".into())),
        };
        Ok(match &doc.name {
            Some(n) => l.with_name(n.clone()),
            None => l,
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rational::ratio;

    #[test]
    fn catalog_determinants_and_minima() {
        for (name, det, min) in [("Z4", 1, 1), ("D4", 4, 2), ("E6", 3, 2), ("E7", 2, 2), ("E8", 1, 2)] {
            let l = catalog(name).unwrap();
            assert_eq!(l.det(), int(det), "{name}");
            assert_eq!(l.minimum(), int(min), "{name}");
        }
        assert_eq!(catalog("z4").unwrap().basis(), Some(&RatMatrix::identity(4)));
        assert!(catalog("K12").is_err());
    }

    #[test]
    fn short_vector_counts() {
        assert_eq!(short_vectors(&catalog("Z2").unwrap(), &int(1), false).len(), 4);
        assert_eq!(short_vectors(&catalog("D4").unwrap(), &int(2), false).len(), 24);
        assert_eq!(short_vectors(&catalog("E8").unwrap(), &int(2), false).len(), 240);
        assert_eq!(short_vectors(&catalog("E6").unwrap(), &int(2), false).len(), 72);
        assert_eq!(short_vectors(&catalog("E7").unwrap(), &int(2), false).len(), 126);
        let d4 = short_vectors(&catalog("D4").unwrap(), &int(2), false);
        let set: HashSet<&Coords> = d4.iter().collect();
        for v in &d4 {
            let neg: Coords = v.iter().map(|c| -c).collect();
            assert!(set.contains(&neg));
        }
    }

    #[test]
    fn sections_of_small_lattices() {
        let e8 = catalog("E8").unwrap();
        let s1 = minimal_sections(&e8, 1, None).unwrap();
        assert_eq!((s1.delta.clone(), s1.len()), (int(2), 120));
        let d4 = catalog("D4").unwrap();
        let s2 = minimal_sections(&d4, 2, None).unwrap();
        assert_eq!(s2.delta, int(3));
        for g in &s2.witness_grams {
            assert_eq!(g.det().unwrap(), int(3));
        }
        let z4 = catalog("Z4").unwrap();
        let s = minimal_sections(&z4, 2, None).unwrap();
        assert_eq!((s.delta.clone(), s.len()), (int(1), 6));
        let z6 = catalog("Z6").unwrap();
        let s = minimal_sections(&z6, 3, None).unwrap();
        assert_eq!((s.delta.clone(), s.len()), (int(1), 20));
        assert!(minimal_sections(&d4, 3, None).is_err());
    }

    #[test]
    fn rankin_values() {
        let d4 = catalog("D4").unwrap();
        let r = rankin(&d4, 2).unwrap();
        assert_eq!(r.gamma_exact, Some(ratio(3, 2)));
        assert!((r.gamma_m - 1.5).abs() < 1e-12);
        assert_eq!(rankin(&catalog("E8").unwrap(), 1).unwrap().gamma_exact, Some(int(2)));
        assert_eq!(rankin(&catalog("Z5").unwrap(), 1).unwrap().gamma_exact, Some(int(1)));
    }

    #[test]
    fn perfection_and_eutaxy() {
        let z2 = catalog("Z2").unwrap();
        let s = minimal_sections(&z2, 1, None).unwrap();
        let p = check_perfection(&z2, &s);
        assert_eq!((p.rank, p.is_perfect), (2, false));
        let e = check_eutaxy(&z2, &s).unwrap();
        assert!(e.is_eutactic && e.uniform);
        assert_eq!(e.weights.unwrap(), vec![int(1), int(1)]);

        let d4 = catalog("D4").unwrap();
        let s = minimal_sections(&d4, 1, None).unwrap();
        assert!(check_perfection(&d4, &s).is_perfect);
        let e = check_eutaxy(&d4, &s).unwrap();
        assert_eq!(e.weights.unwrap(), vec![ratio(1, 3); 12]);
    }

    #[test]
    fn rank_deficient_sections_are_not_eutactic() {
        let z3 = catalog("Z3").unwrap();
        let mut s = minimal_sections(&z3, 1, None).unwrap();
        s.sections.pop();
        s.witness_bases.pop();
        s.witness_grams.pop();
        assert!(!check_eutaxy(&z3, &s).unwrap().is_eutactic);
    }

    #[test]
    fn barnes_wall_small_cases() {
        let bw4 = barnes_wall(2).unwrap();
        assert_eq!(bw4.det(), int(64));
        assert_eq!(bw4.minimum(), int(4));
        let n4 = barnes_wall_normalized(2).unwrap();
        assert_eq!((n4.det(), n4.minimum()), (int(4), int(2)));
        assert_eq!(n4.minimal_vectors(false).len(), 24);
        let n8 = barnes_wall_normalized(3).unwrap();
        assert_eq!(n8.det(), int(1));
        assert!(n8.is_even());
        assert_eq!(n8.minimal_vectors(false).len(), 240);
        assert!(barnes_wall(5).is_err());
    }

    #[test]
    fn affine_subspace_counts() {
        // 16 points, 120 lines, 140 planes, 30 hyperplanes, 1 whole space
        let subs = affine_subspaces(4);
        let count = |d| subs.iter().filter(|(_, dd)| *dd == d).count();
        assert_eq!([count(0), count(1), count(2), count(3), count(4)], [16, 120, 140, 30, 1]);
    }

    #[test]
    fn unimodular_change_preserves_sections() {
        let d4 = catalog("D4").unwrap();
        let u = vec![vec![1, 1, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 3], vec![0, 0, 0, 1]];
        let t = d4.transformed(&u).unwrap();
        assert_eq!(minimal_sections(&t, 2, None).unwrap().delta, int(3));
        assert!(d4.transformed(&[vec![2, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0], vec![0, 0, 0, 1]]).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let e6 = catalog("E6").unwrap();
        let s = serde_json::to_string(&e6.to_json()).unwrap();
        assert_eq!(Lattice::from_json_str(&s).unwrap(), e6);
        let d4 = catalog("D4").unwrap();
        let s = serde_json::to_string(&d4.to_json()).unwrap();
        assert_eq!(Lattice::from_json_str(&s).unwrap(), d4);
    }
}
