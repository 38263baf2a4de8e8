//! Points of the real Grassmannian as exact subspaces, finite configurations
//! of them, and the two design criteria: the pair average of `sigma^t`
//! against `c_{m,n}(2t)`, and the zonal sums.
//!
//! Principal cosines squared `y_i(p, p')` are never extracted one by one: all
//! quantities come from power sums `sum y_i^t = tr((pi_p pi_p')^t)`, which stay
//! rational.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactalg::rational::{common_denominator, format_rational, int, Rational};
use crate::exactalg::RatMatrix;
use crate::zonal::{self, jacobi_p, Partition, PowerSums};

/// An m-dimensional subspace of Q^n, stored as the RREF of a basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    basis: RatMatrix,
}

impl Subspace {
    /// Span of the rows of `basis`, which must be linearly independent.
    pub fn new(basis: &RatMatrix) -> Result<Self> {
        let s = Self::span_of(basis);
        if s.dim() != basis.rows() || s.dim() == 0 {
            return Err(Error::InvalidArgument(format!(
                "basis rows are not independent (rank {} of {})",
                s.dim(),
                basis.rows()
            )));
        }
        Ok(s)
    }

    /// Span of arbitrary rows (the zero subspace is allowed).
    pub fn span_of(rows: &RatMatrix) -> Self {
        Self {
            basis: rows.row_space(),
        }
    }

    pub fn line(v: &[Rational]) -> Result<Self> {
        Self::new(&RatMatrix::from_rows(vec![v.to_vec()])?)
    }

    pub fn from_i64_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::new(&RatMatrix::from_i64_rows(rows))
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn ambient(&self) -> usize {
        self.basis.cols()
    }

    /// The canonical (RREF) basis.
    pub fn basis(&self) -> &RatMatrix {
        &self.basis
    }

    /// Image under `v -> g v`.
    pub fn transform(&self, g: &RatMatrix) -> Result<Self> {
        let img = self.basis.checked_mul(&g.transpose())?;
        Self::new(&img)
    }
}

/// Orthogonal projector onto `p` for the standard inner product: `B^T (B B^T)^-1 B`.
pub fn projector(p: &Subspace) -> RatMatrix {
    let b = p.basis();
    let bt = b.transpose();
    let g = b * &bt;
    let ginv = g.inverse().expect("basis rows are independent");
    &(&bt * &ginv) * b
}

/// `[sum y_i^t for t in 1..=tmax]` computed as `tr((pi_p pi_p')^t)` from the
/// full n x n projectors.
pub fn principal_power_sums(p: &Subspace, q: &Subspace, tmax: u32) -> Result<Vec<Rational>> {
    check_pair(p, q)?;
    if tmax < 1 {
        return Err(Error::InvalidArgument("tmax must be >= 1".into()));
    }
    let prod = &projector(p) * &projector(q);
    let mut acc = prod.clone();
    let mut out = Vec::with_capacity(tmax as usize);
    for t in 1..=tmax {
        if t > 1 {
            acc = &acc * &prod;
        }
        out.push(acc.trace()?);
    }
    Ok(out)
}

/// Same power sums for the inner product `x^T Q y`, through the reduced m x m
/// operator `G^-1 C G'^-1 C^T` with `G = B Q B^T`, `C = B Q B'^T`.
pub fn principal_power_sums_in(metric: Option<&RatMatrix>, p: &Subspace, q: &Subspace, tmax: u32) -> Result<Vec<Rational>> {
    check_pair(p, q)?;
    if tmax < 1 {
        return Err(Error::InvalidArgument("tmax must be >= 1".into()));
    }
    let reduced = reduced_operator(metric, p, q)?;
    let mut acc = reduced.clone();
    let mut out = Vec::with_capacity(tmax as usize);
    for t in 1..=tmax {
        if t > 1 {
            acc = &acc * &reduced;
        }
        out.push(acc.trace()?);
    }
    Ok(out)
}

fn reduced_operator(metric: Option<&RatMatrix>, p: &Subspace, q: &Subspace) -> Result<RatMatrix> {
    let (bp, bq) = (p.basis(), q.basis());
    let (bpq, bqq) = match metric {
        Some(qm) => (bp * qm, bq * qm),
        None => (bp.clone(), bq.clone()),
    };
    let gp = &bpq * &bp.transpose();
    let gq = &bqq * &bq.transpose();
    let c = &bpq * &bq.transpose();
    let left = &gp.inverse()? * &c;
    let right = &gq.inverse()? * &c.transpose();
    Ok(&left * &right)
}

fn check_pair(p: &Subspace, q: &Subspace) -> Result<()> {
    if p.dim() != q.dim() || p.ambient() != q.ambient() {
        return Err(Error::ShapeMismatch {
            op: "subspace pair",
            left: (p.dim(), p.ambient()),
            right: (q.dim(), q.ambient()),
        });
    }
    Ok(())
}

/// `P_mu(y_1(p,p'), .., y_m(p,p'))` for the standard inner product.
pub fn eval_zonal(mu: &Partition, p: &Subspace, q: &Subspace) -> Result<Rational> {
    let poly = jacobi_p(mu, p.dim(), p.ambient())?;
    let sums = principal_power_sums(p, q, 2)?;
    Ok(poly.eval(&PowerSums {
        p1: sums[0].clone(),
        p2: sums[1].clone(),
    }))
}

/// A finite multiset of m-subspaces of Q^n, optionally carrying a positive
/// definite inner product (Gram matrix of the coordinate basis).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    n: usize,
    m: usize,
    points: Vec<Subspace>,
    metric: Option<RatMatrix>,
}

impl Configuration {
    pub fn new(points: Vec<Subspace>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidArgument("configuration needs at least one point".into()))?;
        let (m, n) = (first.dim(), first.ambient());
        if let Some(bad) = points.iter().find(|p| p.dim() != m || p.ambient() != n) {
            return Err(Error::ShapeMismatch {
                op: "Configuration::new",
                left: (m, n),
                right: (bad.dim(), bad.ambient()),
            });
        }
        Ok(Self {
            n,
            m,
            points,
            metric: None,
        })
    }

    pub fn with_metric(points: Vec<Subspace>, metric: RatMatrix) -> Result<Self> {
        let mut cfg = Self::new(points)?;
        if metric.shape() != (cfg.n, cfg.n) || !metric.is_symmetric() {
            return Err(Error::InvalidArgument("metric must be a symmetric n x n matrix".into()));
        }
        if !metric.is_positive_definite() {
            return Err(Error::InvalidArgument("metric must be positive definite".into()));
        }
        cfg.metric = (metric != RatMatrix::identity(cfg.n)).then_some(metric);
        Ok(cfg)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Subspace] {
        &self.points
    }

    pub fn metric(&self) -> Option<&RatMatrix> {
        self.metric.as_ref()
    }

    /// Distinct points with their multiplicities, in first-seen order.
    pub fn multiplicities(&self) -> Vec<(Subspace, u64)> {
        let mut index: HashMap<&Subspace, usize> = HashMap::new();
        let mut out: Vec<(Subspace, u64)> = Vec::new();
        for p in &self.points {
            match index.get(p) {
                Some(&i) => out[i].1 += 1,
                None => {
                    index.insert(p, out.len());
                    out.push((p.clone(), 1));
                }
            }
        }
        out
    }

    /// Number of points equal to an earlier point.
    pub fn collisions(&self) -> usize {
        self.points.len() - self.multiplicities().len()
    }

    pub fn extend(&mut self, other: Configuration) -> Result<()> {
        if other.n != self.n || other.m != self.m || other.metric != self.metric {
            return Err(Error::ShapeMismatch {
                op: "Configuration::extend",
                left: (self.m, self.n),
                right: (other.m, other.n),
            });
        }
        self.points.extend(other.points);
        Ok(())
    }
}

/// Weighted double sums over all ordered pairs of a configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairSums {
    /// total weight `|D|`
    pub size: u64,
    /// `sigma_sums[t-1] = sum_{p,p'} sigma(p,p')^t`
    pub sigma_sums: Vec<Rational>,
    /// `sum_{p,p'} sum_i y_i^2`
    pub p2_sum: Rational,
}

struct Prepared {
    basis: Vec<Vec<i128>>,
    basis_q: Vec<Vec<i128>>,
    adj: Vec<Vec<i128>>,
    det: i128,
}

fn to_i128(x: &BigInt) -> Option<i128> {
    x.to_i128()
}

fn prepare(p: &Subspace, metric_int: Option<&Vec<Vec<i128>>>) -> Option<Prepared> {
    let rows = p.basis().primitive_integer_rows();
    let basis: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| r.iter().map(to_i128).collect::<Option<Vec<_>>>())
        .collect::<Option<_>>()?;
    let n = p.ambient();
    let basis_q: Vec<Vec<i128>> = match metric_int {
        None => basis.clone(),
        Some(q) => basis
            .iter()
            .map(|r| {
                (0..n)
                    .map(|j| {
                        r.iter()
                            .zip(q.iter())
                            .try_fold(0i128, |acc, (a, qrow)| acc.checked_add(a.checked_mul(qrow[j])?))
                    })
                    .collect::<Option<Vec<_>>>()
            })
            .collect::<Option<_>>()?,
    };
    let m = basis.len();
    let gram = RatMatrix::from_fn(m, m, |a, b| {
        let v: i128 = basis_q[a].iter().zip(&basis[b]).map(|(x, y)| x * y).sum();
        Rational::from_integer(BigInt::from(v))
    });
    let det = gram.det().ok()?;
    let adj = gram.inverse().ok()?.scale(&det);
    let adj: Vec<Vec<i128>> = (0..m)
        .map(|a| (0..m).map(|b| to_i128(&adj.get(a, b).to_integer())).collect::<Option<Vec<_>>>())
        .collect::<Option<_>>()?;
    Some(Prepared {
        basis,
        basis_q,
        adj,
        det: to_i128(&det.to_integer())?,
    })
}

fn mat_mul_checked(a: &[Vec<i128>], b: &[Vec<i128>]) -> Option<Vec<Vec<i128>>> {
    let (r, k, c) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    let mut out = vec![vec![0i128; c]; r];
    for i in 0..r {
        for l in 0..k {
            let x = a[i][l];
            if x == 0 {
                continue;
            }
            for j in 0..c {
                out[i][j] = out[i][j].checked_add(x.checked_mul(b[l][j])?)?;
            }
        }
    }
    Some(out)
}

/// `(tr N, tr N^2, D)` with `N / D` the reduced operator of the pair.
fn pair_numerators(a: &Prepared, b: &Prepared) -> Option<(i128, i128, i128)> {
    let m = a.basis.len();
    let c: Vec<Vec<i128>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    a.basis_q[i]
                        .iter()
                        .zip(&b.basis[j])
                        .try_fold(0i128, |acc, (x, y)| acc.checked_add(x.checked_mul(*y)?))
                })
                .collect::<Option<Vec<_>>>()
        })
        .collect::<Option<_>>()?;
    let (trace, trace2) = if m == 1 {
        let v = c[0][0].checked_mul(c[0][0])?.checked_mul(a.adj[0][0])?.checked_mul(b.adj[0][0])?;
        (v, v.checked_mul(v)?)
    } else {
        let ct: Vec<Vec<i128>> = (0..m).map(|i| (0..m).map(|j| c[j][i]).collect()).collect();
        let left = mat_mul_checked(&a.adj, &c)?;
        let right = mat_mul_checked(&b.adj, &ct)?;
        let n = mat_mul_checked(&left, &right)?;
        let mut tr = 0i128;
        let mut tr2 = 0i128;
        for i in 0..m {
            tr = tr.checked_add(n[i][i])?;
            for j in 0..m {
                tr2 = tr2.checked_add(n[i][j].checked_mul(n[j][i])?)?;
            }
        }
        (tr, tr2)
    };
    Some((trace, trace2, a.det.checked_mul(b.det)?))
}

#[derive(Default)]
struct Accumulator {
    /// denominator D -> numerators of (sigma^1..sigma^T over D^t, p2 over D^2)
    by_den: HashMap<i128, Vec<i128>>,
    spill: Vec<Rational>,
}

impl Accumulator {
    fn new(slots: usize) -> Self {
        Self {
            by_den: HashMap::new(),
            spill: vec![Rational::zero(); slots],
        }
    }

    fn add_exact(&mut self, values: &[Rational], weight: u64) {
        let w = Rational::from_integer(BigInt::from(weight));
        for (s, v) in self.spill.iter_mut().zip(values) {
            *s += v * &w;
        }
    }

    fn add_pair(&mut self, tr: i128, tr2: i128, den: i128, tmax: usize, weight: u64) -> bool {
        let slots = tmax + 1;
        let mut vals = Vec::with_capacity(slots);
        let mut pw = 1i128;
        for _ in 0..tmax {
            match pw.checked_mul(tr).and_then(|x| x.checked_mul(weight as i128)) {
                Some(v) => {
                    pw *= tr;
                    vals.push(v);
                }
                None => return false,
            }
        }
        match tr2.checked_mul(weight as i128) {
            Some(v) => vals.push(v),
            None => return false,
        }
        let entry = self.by_den.entry(den).or_insert_with(|| vec![0; slots]);
        let mut ok = true;
        let mut next = entry.clone();
        for (e, v) in next.iter_mut().zip(&vals) {
            match e.checked_add(*v) {
                Some(s) => *e = s,
                None => ok = false,
            }
        }
        if ok {
            *entry = next;
            return true;
        }
        // flush the bucket into the exact spill and retry
        let flushed = std::mem::replace(entry, vec![0; slots]);
        self.flush_bucket(den, &flushed, tmax);
        let entry = self.by_den.get_mut(&den).expect("bucket exists");
        *entry = vals;
        true
    }

    fn flush_bucket(&mut self, den: i128, nums: &[i128], tmax: usize) {
        let d = Rational::from_integer(BigInt::from(den));
        let mut dp = int(1);
        for (t, num) in nums.iter().take(tmax).enumerate() {
            dp *= &d;
            let _ = t;
            self.spill[t] += Rational::from_integer(BigInt::from(*num)) / &dp;
        }
        self.spill[tmax] += Rational::from_integer(BigInt::from(nums[tmax])) / (&d * &d);
    }

    fn merge(mut self, other: Self, tmax: usize) -> Self {
        for (s, o) in self.spill.iter_mut().zip(other.spill) {
            *s += o;
        }
        for (den, nums) in other.by_den {
            let slots = tmax + 1;
            let entry = self.by_den.entry(den).or_insert_with(|| vec![0; slots]);
            let sum: Option<Vec<i128>> = entry.iter().zip(&nums).map(|(a, b)| a.checked_add(*b)).collect();
            match sum {
                Some(s) => *entry = s,
                None => {
                    let mine = std::mem::replace(entry, vec![0; slots]);
                    self.flush_bucket(den, &mine, tmax);
                    self.flush_bucket(den, &nums, tmax);
                }
            }
        }
        self
    }

    fn finish(mut self, tmax: usize) -> Vec<Rational> {
        let buckets: Vec<(i128, Vec<i128>)> = self.by_den.drain().collect();
        for (den, nums) in buckets {
            self.flush_bucket(den, &nums, tmax);
        }
        self.spill
    }
}

fn integer_metric(metric: Option<&RatMatrix>) -> Option<Option<Vec<Vec<i128>>>> {
    let Some(q) = metric else {
        return Some(None);
    };
    let d = Rational::from_integer(common_denominator(q.entries()));
    let rows = (0..q.rows())
        .map(|i| {
            q.row(i)
                .iter()
                .map(|x| to_i128(&(x * &d).to_integer()))
                .collect::<Option<Vec<_>>>()
        })
        .collect::<Option<Vec<_>>>()?;
    Some(Some(rows))
}

fn exact_pair_values(metric: Option<&RatMatrix>, p: &Subspace, q: &Subspace, tmax: usize) -> Vec<Rational> {
    let sums = principal_power_sums_in(metric, p, q, 2).expect("pair shapes already checked");
    let mut out = Vec::with_capacity(tmax + 1);
    let mut pw = int(1);
    for _ in 0..tmax {
        pw *= &sums[0];
        out.push(pw.clone());
    }
    out.push(sums[1].clone());
    out
}

/// Exact weighted sums of `sigma^t` (t = 1..=tmax) and `sum y_i^2` over all ordered pairs.
pub fn pair_sums(cfg: &Configuration, tmax: u32) -> PairSums {
    let tmax = tmax.max(1) as usize;
    let distinct = cfg.multiplicities();
    let size: u64 = distinct.iter().map(|(_, w)| w).sum();
    let metric = cfg.metric();
    let qint = integer_metric(metric);
    let prepared: Option<Vec<Prepared>> = qint
        .as_ref()
        .and_then(|q| distinct.iter().map(|(p, _)| prepare(p, q.as_ref())).collect());
    let slots = tmax + 1;
    let total = (0..distinct.len())
        .into_par_iter()
        .fold(
            || Accumulator::new(slots),
            |mut acc, i| {
                let (pi, wi) = &distinct[i];
                for j in i..distinct.len() {
                    let (pj, wj) = &distinct[j];
                    let weight = if i == j { wi * wi } else { 2 * wi * wj };
                    let fast = prepared.as_ref().and_then(|pr| pair_numerators(&pr[i], &pr[j]));
                    let done = match fast {
                        Some((tr, tr2, den)) => acc.add_pair(tr, tr2, den, tmax, weight),
                        None => false,
                    };
                    if !done {
                        acc.add_exact(&exact_pair_values(metric, pi, pj, tmax), weight);
                    }
                }
                acc
            },
        )
        .reduce(|| Accumulator::new(slots), |a, b| a.merge(b, tmax));
    let mut values = total.finish(tmax);
    let p2_sum = values.pop().expect("p2 slot");
    PairSums {
        size,
        sigma_sums: values,
        p2_sum,
    }
}

/// `c_{m,n}(2t)` when available: closed forms for `t <= 3`, exact line moments for `m = 1`.
pub fn expected_constant(m: usize, n: usize, t: u32) -> Result<Rational> {
    if t <= 3 {
        zonal::constant_c(m, n, t)
    } else if m == 1 && n >= 2 {
        Ok(zonal::line_moment(n, t))
    } else {
        Err(Error::Unsupported(format!(
            "no exact constant for 2t = {} with m = {m}",
            2 * t
        )))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DesignLevel {
    pub t: u32,
    #[serde(with = "crate::exactalg::rational::serde_rational")]
    pub average_sigma_t: Rational,
    #[serde(with = "crate::exactalg::rational::serde_rational")]
    pub expected_c: Rational,
    pub is_design: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZonalSum {
    #[serde(serialize_with = "serialize_partition")]
    pub partition: Partition,
    #[serde(with = "crate::exactalg::rational::serde_rational")]
    pub sum: Rational,
}

fn serialize_partition<S: serde::Serializer>(p: &Partition, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_string())
}

/// Verdicts of [`verify_design`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DesignReport {
    pub m: usize,
    pub n: usize,
    pub size: u64,
    pub distinct: usize,
    pub levels: Vec<DesignLevel>,
    pub zonal_sums: Vec<ZonalSum>,
    /// largest `t` with every level `<= t` certified (0 if none)
    pub strength: u32,
    /// certification at `t` implies certification at every smaller level
    pub monotone: bool,
    /// zonal sums are nonnegative, and vanish up to the certified degree
    pub zonal_consistent: bool,
}

impl DesignReport {
    pub fn level(&self, t: u32) -> Option<&DesignLevel> {
        self.levels.iter().find(|l| l.t == t)
    }

    pub fn is_design(&self, t: u32) -> bool {
        self.level(t).is_some_and(|l| l.is_design)
    }
}

/// Certifies the 2t-design property of `cfg` for `t = 1..=tmax`.
pub fn verify_design(cfg: &Configuration, tmax: u32) -> Result<DesignReport> {
    if cfg.is_empty() {
        return Err(Error::InvalidArgument("empty configuration".into()));
    }
    if tmax < 1 {
        return Err(Error::InvalidArgument("tmax must be >= 1".into()));
    }
    let (m, n) = (cfg.m(), cfg.n());
    let expected: Vec<Rational> = (1..=tmax).map(|t| expected_constant(m, n, t)).collect::<Result<_>>()?;
    let sums = pair_sums(cfg, tmax.max(2));
    let total = Rational::from_integer(BigInt::from(sums.size));
    let pairs = &total * &total;
    let levels: Vec<DesignLevel> = (1..=tmax)
        .zip(expected)
        .map(|(t, c)| {
            let avg = &sums.sigma_sums[t as usize - 1] / &pairs;
            DesignLevel {
                t,
                is_design: avg == c,
                average_sigma_t: avg,
                expected_c: c,
            }
        })
        .collect();
    let zonal_sums = zonal_sums_from(&sums, m, n)?;
    let strength = levels.iter().take_while(|l| l.is_design).count() as u32;
    let monotone = levels.iter().all(|l| !l.is_design || l.t <= strength);
    let zonal_consistent = zonal_sums.iter().all(|z| {
        !z.sum.is_negative() && (z.partition.degree() > strength || z.sum.is_zero())
    });
    Ok(DesignReport {
        m,
        n,
        size: sums.size,
        distinct: cfg.multiplicities().len(),
        levels,
        zonal_sums,
        strength,
        monotone,
        zonal_consistent,
    })
}

fn zonal_sums_from(sums: &PairSums, m: usize, n: usize) -> Result<Vec<ZonalSum>> {
    let total = Rational::from_integer(BigInt::from(sums.size));
    let pairs = &total * &total;
    let e2_sum = (&sums.sigma_sums[1] - &sums.p2_sum) / int(2);
    Partition::supported(m)
        .into_iter()
        .map(|mu| {
            let poly = jacobi_p(&mu, m, n)?;
            let sum = &poly.coeff_p2 * &sums.p2_sum
                + &poly.coeff_e2 * &e2_sum
                + &poly.coeff_p1 * &sums.sigma_sums[0]
                + &poly.constant * &pairs;
            Ok(ZonalSum { partition: mu, sum })
        })
        .collect()
}

/// `sum_{p,p' in D} P_mu(y(p,p'))`.
pub fn zonal_positivity(cfg: &Configuration, mu: &Partition) -> Result<Rational> {
    if cfg.is_empty() {
        return Err(Error::InvalidArgument("empty configuration".into()));
    }
    let poly = jacobi_p(mu, cfg.m(), cfg.n())?;
    let sums = pair_sums(cfg, 2);
    let total = Rational::from_integer(BigInt::from(sums.size));
    let e2_sum = (&sums.sigma_sums[1] - &sums.p2_sum) / int(2);
    Ok(&poly.coeff_p2 * &sums.p2_sum
        + &poly.coeff_e2 * &e2_sum
        + &poly.coeff_p1 * &sums.sigma_sums[0]
        + &poly.constant * &total * &total)
}

/// JSON form: `{ "n", "m", "points": [m x n rational strings], "gram"? }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConfigurationJson {
    pub n: usize,
    pub m: usize,
    pub points: Vec<Vec<Vec<RationalField>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<RationalField>>>,
}

/// A rational written as `"p/q"` (integers also accepted when reading).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(transparent)]
pub struct RationalField(#[serde(with = "crate::exactalg::rational::serde_rational")] pub Rational);

fn matrix_to_json(m: &RatMatrix) -> Vec<Vec<RationalField>> {
    m.row_vecs()
        .into_iter()
        .map(|r| r.into_iter().map(RationalField).collect())
        .collect()
}

fn matrix_from_json(rows: &[Vec<RationalField>]) -> Result<RatMatrix> {
    RatMatrix::from_rows(rows.iter().map(|r| r.iter().map(|x| x.0.clone()).collect()).collect())
}

impl Configuration {
    pub fn to_json(&self) -> ConfigurationJson {
        ConfigurationJson {
            n: self.n,
            m: self.m,
            points: self.points.iter().map(|p| matrix_to_json(p.basis())).collect(),
            gram: self.metric.as_ref().map(matrix_to_json),
        }
    }

    pub fn from_json(doc: &ConfigurationJson) -> Result<Self> {
        let points = doc
            .points
            .iter()
            .map(|rows| {
                let basis = matrix_from_json(rows)?;
                if basis.shape() != (doc.m, doc.n) {
                    return Err(Error::InvalidArgument(format!(
                        "point has shape {:?}, expected {}x{}",
                        basis.shape(),
                        doc.m,
                        doc.n
                    )));
                }
                Subspace::new(&basis)
            })
            .collect::<Result<Vec<_>>>()?;
        match &doc.gram {
            Some(g) => Self::with_metric(points, matrix_from_json(g)?),
            None => Self::new(points),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("configuration serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: ConfigurationJson = serde_json::from_str(s)?;
        Self::from_json(&doc)
    }
}

/// Renders the report's exact values; convenience for diagnostics.
pub fn describe(report: &DesignReport) -> String {
    report
        .levels
        .iter()
        .map(|l| {
            format!(
                "t={} avg={} c={} design={}",
                l.t,
                format_rational(&l.average_sigma_t),
                format_rational(&l.expected_c),
                l.is_design
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rational::ratio;

    fn e(n: usize, i: usize) -> Vec<i64> {
        (0..n).map(|j| i64::from(j == i)).collect()
    }

    #[test]
    fn projector_examples() {
        let p = Subspace::from_i64_rows(&[[1, 0]]).unwrap();
        assert_eq!(projector(&p), RatMatrix::from_i64_rows(&[[1, 0], [0, 0]]));
        let q = Subspace::from_i64_rows(&[[1, 1]]).unwrap();
        let half = ratio(1, 2);
        assert_eq!(projector(&q), RatMatrix::from_rows(vec![vec![half.clone(); 2]; 2]).unwrap());
        let plane = Subspace::from_i64_rows(&[[1, 2, 0, 1], [0, 1, 1, -1]]).unwrap();
        let pr = projector(&plane);
        assert_eq!(&pr * &pr, pr);
        assert_eq!(pr.trace().unwrap(), int(2));
        assert!(pr.is_symmetric());
    }

    #[test]
    fn power_sum_examples() {
        let p = Subspace::from_i64_rows(&[[1, 0, 0, 0]]).unwrap();
        let q = Subspace::from_i64_rows(&[[1, 1, 0, 0]]).unwrap();
        let r = Subspace::from_i64_rows(&[[0, 0, 1, 0]]).unwrap();
        assert_eq!(principal_power_sums(&p, &q, 3).unwrap(), vec![ratio(1, 2), ratio(1, 4), ratio(1, 8)]);
        assert_eq!(principal_power_sums(&p, &p, 3).unwrap(), vec![int(1); 3]);
        assert_eq!(principal_power_sums(&p, &r, 2).unwrap(), vec![int(0); 2]);
        let plane = Subspace::from_i64_rows(&[[1, 0, 0, 0], [0, 1, 0, 0]]).unwrap();
        assert!(principal_power_sums(&p, &plane, 1).is_err());
        assert_eq!(principal_power_sums(&plane, &plane, 2).unwrap(), vec![int(2), int(2)]);
    }

    #[test]
    fn reduced_route_matches_projector_route() {
        let a = Subspace::from_i64_rows(&[[1, 2, 0, 1, 3], [0, 1, 1, -1, 2]]).unwrap();
        let b = Subspace::from_i64_rows(&[[2, -1, 1, 0, 1], [1, 1, 0, 4, -2]]).unwrap();
        assert_eq!(
            principal_power_sums(&a, &b, 4).unwrap(),
            principal_power_sums_in(None, &a, &b, 4).unwrap()
        );
    }

    #[test]
    fn zonal_examples() {
        let p = Subspace::from_i64_rows(&[e(4, 0)]).unwrap();
        let q = Subspace::from_i64_rows(&[e(4, 1)]).unwrap();
        assert_eq!(eval_zonal(&Partition::empty(), &p, &q).unwrap(), int(1));
        assert_eq!(eval_zonal(&Partition::one(), &p, &p).unwrap(), int(1));
        assert_eq!(eval_zonal(&Partition::one(), &p, &q).unwrap(), ratio(-1, 3));
        assert!(eval_zonal(&Partition::new(vec![3]).unwrap(), &p, &q).is_err());
    }

    #[test]
    fn single_point_is_not_a_two_design() {
        let cfg = Configuration::new(vec![Subspace::from_i64_rows(&[e(4, 0), e(4, 1)]).unwrap()]).unwrap();
        let r = verify_design(&cfg, 1).unwrap();
        assert_eq!(r.levels[0].average_sigma_t, int(2));
        assert!(!r.is_design(1));
    }

    #[test]
    fn coordinate_axes_are_two_but_not_four_designs() {
        for n in 2..7 {
            let axes: Vec<Subspace> = (0..n).map(|i| Subspace::from_i64_rows(&[e(n, i)]).unwrap()).collect();
            let r = verify_design(&Configuration::new(axes).unwrap(), 2).unwrap();
            assert!(r.is_design(1));
            assert!(!r.is_design(2));
            assert_eq!(r.levels[1].average_sigma_t, ratio(1, n as i64));
            assert_eq!(r.levels[1].expected_c, ratio(3, (n * (n + 2)) as i64));
            assert!(r.monotone && r.zonal_consistent);
        }
    }

    #[test]
    fn empty_and_bad_inputs() {
        assert!(Configuration::new(vec![]).is_err());
        assert!(Subspace::from_i64_rows(&[[1, 2], [2, 4]]).is_err());
        let p = Subspace::from_i64_rows(&[[1, 0, 0]]).unwrap();
        let q = Subspace::from_i64_rows(&[[1, 0]]).unwrap();
        assert!(Configuration::new(vec![p.clone(), q]).is_err());
        assert!(Configuration::with_metric(vec![p], RatMatrix::from_i64_rows(&[[1, 0, 0], [0, -1, 0], [0, 0, 1]])).is_err());
    }

    #[test]
    fn metric_and_ambient_agree() {
        // D4 minimal lines in coordinates of a basis, with the Gram matrix as metric
        let basis = RatMatrix::from_i64_rows(&[[1, -1, 0, 0], [0, 1, -1, 0], [0, 0, 1, -1], [0, 0, 1, 1]]);
        let gram = &basis * &basis.transpose();
        let coords = [[1, 0, 0, 0], [0, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, 2], [1, 2, 1, 1]];
        let lattice_pts: Vec<Subspace> = coords.iter().map(|c| Subspace::from_i64_rows(&[*c]).unwrap()).collect();
        let ambient_pts: Vec<Subspace> = lattice_pts.iter().map(|p| Subspace::new(&(p.basis() * &basis)).unwrap()).collect();
        let a = pair_sums(&Configuration::with_metric(lattice_pts, gram).unwrap(), 3);
        let b = pair_sums(&Configuration::new(ambient_pts).unwrap(), 3);
        assert_eq!(a, b);
    }

    #[test]
    fn json_roundtrip() {
        let cfg = Configuration::new(vec![
            Subspace::from_i64_rows(&[[1, 1, 0, 0]]).unwrap(),
            Subspace::from_i64_rows(&[[1, -1, 0, 0]]).unwrap(),
        ])
        .unwrap();
        let s = cfg.to_json_string();
        assert!(s.contains("\"1\""));
        assert_eq!(Configuration::from_json_str(&s).unwrap(), cfg);
    }
}
