//! The hyperbolic quadratic space `(GF(2)^2k, q)` with `q(a, b) = a.b`, its
//! totally isotropic subspaces, orbital invariants, spreads, and the pair
//! averages `d_{w,k}(t)`.
//!
//! A vector `(a, b)` is packed in one word: bits `0..k` hold `a`, bits
//! `k..2k` hold `b`.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactalg::bits::{parity, rank_words, rref_words};
use crate::exactalg::rational::Rational;
use crate::exactalg::BitMatrix;

/// Largest supported half-dimension.
pub const MAX_K: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QuadSpace {
    k: usize,
}

impl QuadSpace {
    pub fn new(k: usize) -> Result<Self> {
        if !(1..=MAX_K).contains(&k) {
            return Err(Error::InvalidArgument(format!("k = {k} outside 1..={MAX_K}")));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        2 * self.k
    }

    pub fn low_mask(&self) -> u64 {
        (1u64 << self.k) - 1
    }

    pub fn pack(&self, a: u64, b: u64) -> u64 {
        (a & self.low_mask()) | ((b & self.low_mask()) << self.k)
    }

    pub fn split(&self, v: u64) -> (u64, u64) {
        (v & self.low_mask(), v >> self.k)
    }

    pub fn q(&self, v: u64) -> u32 {
        let (a, b) = self.split(v);
        parity(a & b)
    }

    /// `B(u, v) = a.b' + a'.b`.
    pub fn bilinear(&self, u: u64, v: u64) -> u32 {
        let (a, b) = self.split(u);
        let (c, d) = self.split(v);
        parity((a & d) ^ (c & b))
    }

    pub fn vectors(&self) -> impl Iterator<Item = u64> {
        0..1u64 << (2 * self.k)
    }

    /// Nonzero singular vectors; there are `(2^k - 1)(2^(k-1) + 1)` of them.
    pub fn isotropic_points(&self) -> Vec<u64> {
        self.vectors().filter(|&v| v != 0 && self.q(v) == 0).collect()
    }
}

/// A totally isotropic subspace, stored as a canonical RREF basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IsoSubspace {
    k: usize,
    basis: Vec<u64>,
}

impl IsoSubspace {
    /// Span of `rows`; fails unless `q` vanishes on the span.
    pub fn new(space: QuadSpace, rows: &[u64]) -> Result<Self> {
        let basis = rref_words(rows.to_vec());
        if basis.iter().any(|&v| v >> space.dim() != 0) {
            return Err(Error::InvalidArgument("vector wider than 2k bits".into()));
        }
        for (i, &u) in basis.iter().enumerate() {
            if space.q(u) != 0 || basis[..i].iter().any(|&v| space.bilinear(u, v) != 0) {
                return Err(Error::NotIsotropic);
            }
        }
        Ok(Self { k: space.k, basis })
    }

    pub fn space(&self) -> QuadSpace {
        QuadSpace { k: self.k }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[u64] {
        &self.basis
    }

    pub fn bit_matrix(&self) -> BitMatrix {
        BitMatrix::new(2 * self.k, self.basis.clone()).expect("rows fit in 2k bits")
    }

    pub fn elements(&self) -> Vec<u64> {
        self.bit_matrix().span()
    }

    pub fn contains(&self, v: u64) -> bool {
        self.bit_matrix().contains(v)
    }

    /// Coordinates of `v` in the canonical basis (bit i = coefficient of row i).
    pub fn coordinates(&self, v: u64) -> Option<u64> {
        self.bit_matrix().coordinates(v)
    }

    /// Canonical basis of `self ∩ other`.
    pub fn meet(&self, other: &Self) -> Vec<u64> {
        // solve sum c_i s_i = sum d_j t_j over GF(2) using the joined rows
        let w = self.basis.len();
        let rows: Vec<u64> = self.basis.iter().chain(&other.basis).copied().collect();
        // track combinations: word = vector | (combination << 2k)
        let shift = 2 * self.k;
        let tagged: Vec<u128> = rows
            .iter()
            .enumerate()
            .map(|(i, &r)| u128::from(r) | (1u128 << (shift + i)))
            .collect();
        let mut basis: Vec<u128> = Vec::new();
        let mut meet = Vec::new();
        let low = (1u128 << shift) - 1;
        for mut t in tagged {
            for &b in &basis {
                let p = (b & low).trailing_zeros();
                if (t >> p) & 1 == 1 {
                    t ^= b;
                }
            }
            if t & low == 0 {
                // dependency: the part coming from self's rows is in the meet
                let combo = (t >> shift) as u64;
                let v = (0..w)
                    .filter(|i| combo >> i & 1 == 1)
                    .fold(0u64, |acc, i| acc ^ self.basis[i]);
                meet.push(v);
            } else {
                basis.push(t);
            }
        }
        rref_words(meet)
    }

    pub fn meet_dim(&self, other: &Self) -> usize {
        self.dim() + other.dim() - rank_words(&[self.basis.as_slice(), other.basis.as_slice()].concat())
    }

    /// `dim(self ∩ other^perp)`.
    pub fn meet_perp_dim(&self, other: &Self) -> usize {
        let space = self.space();
        // rows of the map self -> GF(2)^{dim other}, x -> (B(x, t_j))_j
        let images: Vec<u64> = self
            .basis
            .iter()
            .map(|&s| {
                other
                    .basis
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (j, &t)| acc | u64::from(space.bilinear(s, t)) << j)
            })
            .collect();
        self.dim() - rank_words(&images)
    }
}

/// `(dim(S ∩ S'), dim(S ∩ S'^perp))`.
pub fn orbital(s: &IsoSubspace, t: &IsoSubspace) -> Result<(usize, usize)> {
    if s.k != t.k || s.dim() != t.dim() {
        return Err(Error::ShapeMismatch {
            op: "orbital",
            left: (s.dim(), s.k),
            right: (t.dim(), t.k),
        });
    }
    Ok((s.meet_dim(t), s.meet_perp_dim(t)))
}

/// A set of distinct isotropic subspaces sharing `(k, w)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaSet {
    k: usize,
    w: usize,
    members: Vec<IsoSubspace>,
}

impl SigmaSet {
    pub fn new(k: usize, w: usize, members: Vec<IsoSubspace>) -> Result<Self> {
        let mut seen = HashSet::new();
        for s in &members {
            if s.k != k || s.dim() != w {
                return Err(Error::InvalidArgument(format!(
                    "member of dimension {} in GF(2)^{} does not match (k={k}, w={w})",
                    s.dim(),
                    2 * s.k
                )));
            }
            if !seen.insert(s) {
                return Err(Error::InvalidArgument("repeated member".into()));
            }
        }
        Ok(Self { k, w, members })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn members(&self) -> &[IsoSubspace] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Sum over ordered pairs of `|S ∩ S'|^t = 2^(t dim(S ∩ S'))`.
    pub fn meet_power_sum(&self, t: u32) -> BigInt {
        let m = &self.members;
        (0..m.len())
            .into_par_iter()
            .map(|i| {
                m.iter()
                    .map(|s| BigInt::one() << (t as usize * m[i].meet_dim(s)))
                    .sum::<BigInt>()
            })
            .sum()
    }

    /// Pair average of `|S ∩ S'|^t`.
    pub fn meet_average(&self, t: u32) -> Result<Rational> {
        if self.is_empty() {
            return Err(Error::InvalidArgument("empty set".into()));
        }
        let n = BigInt::from(self.len());
        Ok(Rational::new(self.meet_power_sum(t), &n * &n))
    }
}

/// All totally isotropic `w`-subspaces of `(GF(2)^2k, q)`, grown flag by flag.
pub fn enumerate_isotropic(k: usize, w: usize) -> Result<SigmaSet> {
    let space = QuadSpace::new(k)?;
    if w == 0 || w > k {
        return Err(Error::InvalidArgument(format!("need 1 <= w <= k, got w = {w}, k = {k}")));
    }
    let points = space.isotropic_points();
    let mut layer: Vec<IsoSubspace> = points
        .iter()
        .map(|&p| IsoSubspace {
            k,
            basis: vec![p],
        })
        .collect();
    for _ in 1..w {
        let next: HashSet<IsoSubspace> = layer
            .par_iter()
            .flat_map_iter(|s| {
                let elems: HashSet<u64> = s.elements().into_iter().collect();
                points
                    .iter()
                    .filter(|&&p| !elems.contains(&p) && s.basis.iter().all(|&b| space.bilinear(b, p) == 0))
                    .map(|&p| {
                        let mut rows = s.basis.clone();
                        rows.push(p);
                        IsoSubspace {
                            k,
                            basis: rref_words(rows),
                        }
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        layer = next.into_iter().collect();
    }
    layer.sort();
    SigmaSet::new(k, w, layer)
}

/// Default node budget of the spread search.
pub const SPREAD_SEARCH_BUDGET: u64 = 1_000_000;

/// A maximal spread: members of `X_w` meeting pairwise in `{0}` and covering
/// every isotropic point.
pub fn spread(k: usize, w: usize) -> Result<SigmaSet> {
    spread_with_budget(k, w, SPREAD_SEARCH_BUDGET)
}

pub fn spread_with_budget(k: usize, w: usize, budget: u64) -> Result<SigmaSet> {
    let all = enumerate_isotropic(k, w)?;
    if w == 1 {
        return Ok(all);
    }
    let space = QuadSpace::new(k)?;
    let points = space.isotropic_points();
    let index = |v: u64| points.binary_search(&v).expect("isotropic point");
    let words = points.len().div_ceil(64);
    let options: Vec<Vec<u64>> = all
        .members()
        .iter()
        .map(|s| {
            let mut set = vec![0u64; words];
            for v in s.elements().into_iter().filter(|&v| v != 0) {
                let i = index(v);
                set[i / 64] |= 1 << (i % 64);
            }
            set
        })
        .collect();
    let mut by_point: Vec<Vec<usize>> = vec![Vec::new(); points.len()];
    for (o, set) in options.iter().enumerate() {
        for (p, list) in by_point.iter_mut().enumerate() {
            if set[p / 64] >> (p % 64) & 1 == 1 {
                list.push(o);
            }
        }
    }
    let mut search = CoverSearch {
        options: &options,
        by_point: &by_point,
        npoints: points.len(),
        covered: vec![0u64; words],
        alive: vec![true; options.len()],
        chosen: Vec::new(),
        nodes: 0,
        budget,
    };
    match search.solve() {
        Some(true) => {
            let members = search.chosen.iter().map(|&o| all.members()[o].clone()).collect();
            SigmaSet::new(k, w, members)
        }
        Some(false) => Err(Error::NotFound(format!(
            "no spread of totally isotropic {w}-spaces exists for k = {k} (exhaustive search)"
        ))),
        None => Err(Error::NotFound(format!(
            "no spread of totally isotropic {w}-spaces found for k = {k} within {budget} search nodes"
        ))),
    }
}

/// Exact cover by backtracking, branching on the least-covered point.
struct CoverSearch<'a> {
    options: &'a [Vec<u64>],
    by_point: &'a [Vec<usize>],
    npoints: usize,
    covered: Vec<u64>,
    alive: Vec<bool>,
    chosen: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl CoverSearch<'_> {
    fn is_covered(&self, p: usize) -> bool {
        self.covered[p / 64] >> (p % 64) & 1 == 1
    }

    /// `Some(found)` when the search finished, `None` when the budget ran out.
    fn solve(&mut self) -> Option<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return None;
        }
        let mut best: Option<(usize, usize)> = None;
        for p in 0..self.npoints {
            if self.is_covered(p) {
                continue;
            }
            let count = self.by_point[p].iter().filter(|&&o| self.alive[o]).count();
            if best.is_none_or(|(_, c)| count < c) {
                best = Some((p, count));
                if count == 0 {
                    break;
                }
            }
        }
        let Some((p, count)) = best else {
            return Some(true);
        };
        if count == 0 {
            return Some(false);
        }
        let choices: Vec<usize> = self.by_point[p].iter().copied().filter(|&o| self.alive[o]).collect();
        for o in choices {
            let killed: Vec<usize> = (0..self.options.len())
                .filter(|&x| self.alive[x] && intersects(&self.options[x], &self.options[o]))
                .collect();
            for &x in &killed {
                self.alive[x] = false;
            }
            for (c, w) in self.covered.iter_mut().zip(&self.options[o]) {
                *c |= w;
            }
            self.chosen.push(o);
            match self.solve() {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
            self.chosen.pop();
            for (c, w) in self.covered.iter_mut().zip(&self.options[o]) {
                *c &= !w;
            }
            for &x in &killed {
                self.alive[x] = true;
            }
        }
        Some(false)
    }
}

fn intersects(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

/// Checks the defining properties of a maximal spread.
pub fn is_spread(sigma: &SigmaSet) -> bool {
    let space = QuadSpace { k: sigma.k };
    let m = sigma.members();
    let pairwise = (0..m.len()).all(|i| (i + 1..m.len()).all(|j| m[i].meet_dim(&m[j]) == 0));
    let covered = m.len() * ((1usize << sigma.w) - 1);
    pairwise && covered == space.isotropic_points().len()
}

/// `d_{w,k}(t)`: the average of `|S ∩ S'|^t` over all ordered pairs of `X_w`.
pub fn d_constant(k: usize, w: usize, t: u32) -> Result<Rational> {
    if t == 0 {
        enumerate_isotropic(k, w)?;
        return Ok(Rational::one());
    }
    enumerate_isotropic(k, w)?.meet_average(t)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsoDesignCheck {
    pub t: u32,
    #[serde(with = "crate::exactalg::rational::serde_rational")]
    pub average: Rational,
    #[serde(with = "crate::exactalg::rational::serde_rational")]
    pub expected: Rational,
    /// average equals `d_{w,k}(t)`
    pub passes: bool,
    /// average is at least `d_{w,k}(t)`
    pub inequality_holds: bool,
}

/// Compares the pair average of `|S ∩ S'|^t` on `sigma` with `d_{w,k}(t)`.
pub fn check_iso_design(sigma: &SigmaSet, t: u32) -> Result<IsoDesignCheck> {
    if sigma.is_empty() {
        return Err(Error::InvalidArgument("empty set".into()));
    }
    let average = sigma.meet_average(t)?;
    let expected = d_constant(sigma.k, sigma.w, t)?;
    Ok(IsoDesignCheck {
        t,
        passes: average == expected,
        inequality_holds: average >= expected,
        average,
        expected,
    })
}

/// For `w = k`, the two families of maximal isotropic subspaces: `S, S'` lie
/// in the same family iff `dim(S ∩ S') ≡ k (mod 2)`.
pub fn maximal_families(sigma: &SigmaSet) -> Result<(SigmaSet, SigmaSet)> {
    if sigma.w != sigma.k || sigma.is_empty() {
        return Err(Error::InvalidArgument("families are defined for nonempty sets of maximal subspaces".into()));
    }
    let seed = &sigma.members[0];
    let (same, other): (Vec<IsoSubspace>, Vec<IsoSubspace>) = sigma
        .members
        .iter()
        .cloned()
        .partition(|s| (seed.meet_dim(s) + sigma.k).is_multiple_of(2));
    Ok((SigmaSet::new(sigma.k, sigma.w, same)?, SigmaSet::new(sigma.k, sigma.w, other)?))
}

/// `{ "k", "w", "members": [[row words]] }`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SigmaSetJson {
    pub k: usize,
    pub w: usize,
    pub members: Vec<Vec<u64>>,
}

impl SigmaSet {
    pub fn to_json(&self) -> SigmaSetJson {
        SigmaSetJson {
            k: self.k,
            w: self.w,
            members: self.members.iter().map(|s| s.basis.clone()).collect(),
        }
    }

    pub fn from_json(doc: &SigmaSetJson) -> Result<Self> {
        let space = QuadSpace::new(doc.k)?;
        let members = doc
            .members
            .iter()
            .map(|rows| IsoSubspace::new(space, rows))
            .collect::<Result<Vec<_>>>()?;
        Self::new(doc.k, doc.w, members)
    }
}

/// `|X_w|` from the product formula, for cross-checks.
pub fn count_isotropic(k: usize, w: usize) -> BigInt {
    // prod_{i=0}^{w-1} (2^(k-i) - 1)(2^(k-i-1) + 1) / (2^(i+1) - 1)
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..w {
        let a = (BigInt::one() << (k - i)) - 1;
        let b = if k - i >= 1 {
            (BigInt::one() << (k - i - 1)) + 1
        } else {
            BigInt::zero()
        };
        num *= a * b;
        den *= (BigInt::one() << (i + 1)) - 1;
    }
    if den.is_zero() {
        BigInt::zero()
    } else {
        num / den
    }
}
