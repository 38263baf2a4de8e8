//! Signed Pauli operators `X(a)Y(b)` on `R^(2^k)`, joint eigenspaces of
//! lifted isotropic subspaces, the configurations `D_Sigma` with their fast
//! `sigma` evaluation, Clifford-group generators with an orbit engine, and the
//! code-indexed action of `H_2` on tensor invariants.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::binquad::{IsoSubspace, SigmaSet};
use crate::error::{Error, Result};
use crate::exactalg::bits::{parity, rref_words};
use crate::exactalg::rational::{int, pow2, Rational};
use crate::exactalg::{QuadExt, QuadMatrix, RatMatrix};
use crate::grassmann::{pair_sums, principal_power_sums_in, Configuration, Subspace};
use crate::zonal::constant_c;

/// `sign * X(a) Y(b)`: `e_u -> sign * (-1)^(b.u) e_(u+a)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliOp {
    pub k: usize,
    pub a: u64,
    pub b: u64,
    pub sign: i8,
}

impl PauliOp {
    pub fn new(k: usize, a: u64, b: u64, sign: i8) -> Result<Self> {
        let mask = (1u64 << k) - 1;
        if a & !mask != 0 || b & !mask != 0 || !(sign == 1 || sign == -1) {
            return Err(Error::InvalidArgument("Pauli operator out of range".into()));
        }
        Ok(Self { k, a, b, sign })
    }

    /// `+X(a)Y(b)` for a packed vector `(a, b)`.
    pub fn from_vector(k: usize, v: u64) -> Self {
        let mask = (1u64 << k) - 1;
        Self {
            k,
            a: v & mask,
            b: v >> k,
            sign: 1,
        }
    }

    pub fn vector(&self) -> u64 {
        self.a | (self.b << self.k)
    }

    /// `X(a)Y(b) X(a')Y(b') = (-1)^(b.a') X(a+a')Y(b+b')`.
    pub fn compose(&self, other: &Self) -> Self {
        let flip = parity(self.b & other.a) == 1;
        let sign = self.sign * other.sign * if flip { -1 } else { 1 };
        Self {
            k: self.k,
            a: self.a ^ other.a,
            b: self.b ^ other.b,
            sign,
        }
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        self.compose(other) == other.compose(self)
    }

    pub fn dim(&self) -> usize {
        1 << self.k
    }

    /// The signed permutation matrix.
    pub fn matrix(&self) -> RatMatrix {
        let n = self.dim();
        let mut m = RatMatrix::zeros(n, n);
        for u in 0..n as u64 {
            let s = i64::from(self.sign) * if parity(self.b & u) == 1 { -1 } else { 1 };
            m.set((u ^ self.a) as usize, u as usize, int(s));
        }
        m
    }
}

/// A character of `S`, given by its values on the canonical basis rows:
/// `chi(v) = (-1)^(popcount(coords(v) & mask))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Character(pub u64);

impl Character {
    pub fn sign_bit(&self, coords: u64) -> u32 {
        parity(coords & self.0)
    }
}

/// Lifts of the basis of an isotropic subspace to commuting involutions.
#[derive(Clone, Debug)]
pub struct StabilizerLift {
    subspace: IsoSubspace,
    lifts: Vec<PauliOp>,
}

impl StabilizerLift {
    pub fn new(s: &IsoSubspace) -> Result<Self> {
        let k = s.k();
        let lifts: Vec<PauliOp> = s.basis().iter().map(|&v| PauliOp::from_vector(k, v)).collect();
        let id = PauliOp::new(k, 0, 0, 1)?;
        for (i, g) in lifts.iter().enumerate() {
            if g.compose(g) != id {
                return Err(Error::NotIsotropic);
            }
            if lifts[..i].iter().any(|h| !g.commutes_with(h)) {
                return Err(Error::NotIsotropic);
            }
        }
        Ok(Self {
            subspace: s.clone(),
            lifts,
        })
    }

    pub fn subspace(&self) -> &IsoSubspace {
        &self.subspace
    }

    pub fn lifts(&self) -> &[PauliOp] {
        &self.lifts
    }

    /// `g_v`: ordered product of the basis lifts selected by the coordinates of `v`.
    pub fn section(&self, v: u64) -> Result<PauliOp> {
        let coords = self
            .subspace
            .coordinates(v)
            .ok_or_else(|| Error::InvalidArgument("vector not in the subspace".into()))?;
        Ok(self.section_from_coords(coords))
    }

    fn section_from_coords(&self, coords: u64) -> PauliOp {
        let k = self.subspace.k();
        self.lifts
            .iter()
            .enumerate()
            .filter(|(i, _)| coords >> i & 1 == 1)
            .fold(PauliOp::from_vector(k, 0), |acc, (_, g)| acc.compose(g))
    }

    pub fn characters(&self) -> impl Iterator<Item = Character> {
        (0..1u64 << self.lifts.len()).map(Character)
    }

    /// `2^-(k-s) sum_v chi(v) g_v`.
    pub fn projector(&self, chi: Character) -> RatMatrix {
        let k = self.subspace.k();
        let n = 1usize << k;
        let w = self.lifts.len();
        let mut acc = vec![vec![0i64; n]; n];
        for coords in 0..1u64 << w {
            let g = self.section_from_coords(coords);
            let c = if chi.sign_bit(coords) == 1 { -1 } else { 1 };
            for u in 0..n as u64 {
                let s = c * i64::from(g.sign) * if parity(g.b & u) == 1 { -1 } else { 1 };
                acc[(u ^ g.a) as usize][u as usize] += s;
            }
        }
        let scale = pow2(-(w as i64));
        RatMatrix::from_fn(n, n, |i, j| Rational::from_integer(BigInt::from(acc[i][j])) * &scale)
    }

    pub fn eigenspace(&self, chi: Character) -> Subspace {
        Subspace::span_of(&self.projector(chi))
    }
}

/// `D_S`: the `2^(k-s)` joint eigenspaces of the lift of `S`, in character order.
pub fn eigenspaces(s: &IsoSubspace) -> Result<Configuration> {
    let lift = StabilizerLift::new(s)?;
    let pts: Vec<Subspace> = lift.characters().map(|chi| lift.eigenspace(chi)).collect();
    Configuration::new(pts)
}

/// Geometry shared by every character pair of `(S, S')`.
struct PairGeometry {
    /// per basis vector of `S ∩ S'`: (coords in S, sign of g_v in S, coords in S', sign in S')
    meet: Vec<(u64, bool, u64, bool)>,
    meet_dim: usize,
}

impl PairGeometry {
    fn new(a: &StabilizerLift, b: &StabilizerLift) -> Self {
        let meet = a.subspace.meet(&b.subspace);
        let rows = meet
            .iter()
            .map(|&v| {
                let ca = a.subspace.coordinates(v).expect("meet lies in S");
                let cb = b.subspace.coordinates(v).expect("meet lies in S'");
                (
                    ca,
                    a.section_from_coords(ca).sign < 0,
                    cb,
                    b.section_from_coords(cb).sign < 0,
                )
            })
            .collect();
        Self {
            meet: rows,
            meet_dim: meet.len(),
        }
    }

    /// Do the eigenvalues of `X(a)Y(b)` agree on both eigenspaces for every `v` in the meet?
    fn compatible(&self, chi: Character, chi2: Character) -> bool {
        self.meet.iter().all(|&(ca, sa, cb, sb)| {
            (chi.sign_bit(ca) == 1) ^ sa == (chi2.sign_bit(cb) == 1) ^ sb
        })
    }

    /// log2 of sigma when compatible: `2s - k + dim(S ∩ S')`.
    fn log_sigma(&self, k: usize, w: usize) -> i64 {
        let s = (k - w) as i64;
        2 * s - k as i64 + self.meet_dim as i64
    }
}

/// `sigma(p, p')` for eigenspaces `p` of `(S, chi)` and `p'` of `(S', chi')`:
/// `2^(2s-u)` with `u = k - dim(S ∩ S')` when the characters agree on the meet, else 0.
pub fn sigma_pair(s: &IsoSubspace, chi: Character, s2: &IsoSubspace, chi2: Character) -> Result<Rational> {
    if s.k() != s2.k() || s.dim() != s2.dim() {
        return Err(Error::ShapeMismatch {
            op: "sigma_pair",
            left: (s.dim(), s.k()),
            right: (s2.dim(), s2.k()),
        });
    }
    let (a, b) = (StabilizerLift::new(s)?, StabilizerLift::new(s2)?);
    let geo = PairGeometry::new(&a, &b);
    Ok(if geo.compatible(chi, chi2) {
        pow2(geo.log_sigma(s.k(), s.dim()))
    } else {
        Rational::zero()
    })
}

/// `D_Sigma` as a multiset, with its labels.
#[derive(Clone, Debug)]
pub struct DesignBuild {
    pub configuration: Configuration,
    /// `(member index, character)` of each point
    pub labels: Vec<(usize, Character)>,
    /// points equal to an earlier point
    pub collisions: usize,
}

pub fn build_design(sigma: &SigmaSet) -> Result<DesignBuild> {
    if sigma.is_empty() {
        return Err(Error::InvalidArgument("empty set".into()));
    }
    let per_member: Vec<Vec<(Subspace, Character)>> = sigma
        .members()
        .par_iter()
        .map(|s| {
            let lift = StabilizerLift::new(s)?;
            Ok(lift.characters().map(|chi| (lift.eigenspace(chi), chi)).collect())
        })
        .collect::<Result<_>>()?;
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (i, family) in per_member.into_iter().enumerate() {
        for (p, chi) in family {
            points.push(p);
            labels.push((i, chi));
        }
    }
    let configuration = Configuration::new(points)?;
    let collisions = configuration.collisions();
    Ok(DesignBuild {
        configuration,
        labels,
        collisions,
    })
}

/// Sum of `sigma^t` over ordered pairs of `D_Sigma` by the fast formula, t = 1..=tmax.
pub fn fast_sigma_sums(sigma: &SigmaSet, tmax: u32) -> Result<Vec<Rational>> {
    let lifts: Vec<StabilizerLift> = sigma.members().iter().map(StabilizerLift::new).collect::<Result<_>>()?;
    let (k, w) = (sigma.k(), sigma.w());
    let chars = 1u64 << w;
    let sums: Vec<Vec<Rational>> = (0..lifts.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![Rational::zero(); tmax as usize];
            for b in &lifts {
                let geo = PairGeometry::new(&lifts[i], b);
                let mut count = 0u64;
                for x in 0..chars {
                    for y in 0..chars {
                        if geo.compatible(Character(x), Character(y)) {
                            count += 1;
                        }
                    }
                }
                let c = Rational::from_integer(BigInt::from(count));
                for t in 1..=tmax {
                    acc[t as usize - 1] += &c * pow2(geo.log_sigma(k, w) * i64::from(t));
                }
            }
            acc
        })
        .collect();
    Ok((0..tmax as usize)
        .map(|t| sums.iter().map(|v| v[t].clone()).sum())
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TtLevel {
    pub t: u32,
    #[serde(with = "crate::exactalg::rational::serde_rational")]
    pub fast_average: Rational,
    #[serde(with = "crate::exactalg::rational::serde_rational")]
    pub trace_average: Rational,
    /// pair average of `|S ∩ S'|^(t-1)` over Sigma
    #[serde(with = "crate::exactalg::rational::serde_rational")]
    pub iso_average: Rational,
    /// `2^((2s-k)t)` times `iso_average`
    #[serde(with = "crate::exactalg::rational::serde_rational")]
    pub predicted: Rational,
    /// fast, trace and predicted averages all coincide
    pub identity_holds: bool,
    #[serde(with = "crate::exactalg::rational::serde_rational")]
    pub expected_c: Rational,
    pub is_design: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TtReport {
    pub k: usize,
    pub s: usize,
    pub sigma_size: usize,
    pub design_size: usize,
    pub distinct: usize,
    pub collisions: usize,
    pub levels: Vec<TtLevel>,
}

impl TtReport {
    pub fn is_design(&self, t: u32) -> bool {
        self.levels.iter().any(|l| l.t == t && l.is_design)
    }

    pub fn identities_hold(&self) -> bool {
        self.levels.iter().all(|l| l.identity_holds)
    }
}

/// Verifies `D_Sigma` for `t = 1..=tmax` through both the fast formula and the traces.
pub fn verify_tt(sigma: &SigmaSet, tmax: u32) -> Result<TtReport> {
    let build = build_design(sigma)?;
    verify_tt_with(sigma, &build, tmax)
}

pub fn verify_tt_with(sigma: &SigmaSet, build: &DesignBuild, tmax: u32) -> Result<TtReport> {
    if !(1..=3).contains(&tmax) {
        return Err(Error::InvalidArgument("t must be in 1..=3".into()));
    }
    let (k, w) = (sigma.k(), sigma.w());
    let s = k - w;
    let cfg = &build.configuration;
    let size = BigInt::from(cfg.len());
    let pairs = Rational::from_integer(&size * &size);
    let fast = fast_sigma_sums(sigma, tmax)?;
    let trace = pair_sums(cfg, tmax);
    let levels = (1..=tmax)
        .map(|t| {
            let fast_average = &fast[t as usize - 1] / &pairs;
            let trace_average = &trace.sigma_sums[t as usize - 1] / &pairs;
            let iso_average = sigma.meet_average(t - 1)?;
            let predicted = pow2((2 * s as i64 - k as i64) * i64::from(t)) * &iso_average;
            let expected_c = constant_c(1 << s, 1 << k, t)?;
            Ok(TtLevel {
                t,
                identity_holds: fast_average == trace_average && fast_average == predicted,
                is_design: trace_average == expected_c,
                fast_average,
                trace_average,
                iso_average,
                predicted,
                expected_c,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TtReport {
        k,
        s,
        sigma_size: sigma.len(),
        design_size: cfg.len(),
        distinct: cfg.len() - build.collisions,
        collisions: build.collisions,
        levels,
    })
}

/// Pairwise comparison of `sigma_pair` with the trace of the projector product.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathAgreement {
    pub pairs: usize,
    pub mismatches: usize,
}

pub fn compare_sigma_paths(sigma: &SigmaSet, build: &DesignBuild) -> Result<PathAgreement> {
    let lifts: Vec<StabilizerLift> = sigma.members().iter().map(StabilizerLift::new).collect::<Result<_>>()?;
    let (k, w) = (sigma.k(), sigma.w());
    let pts = build.configuration.points();
    let labels = &build.labels;
    let mismatches: usize = (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let mut bad = 0;
            let mut cache: HashMap<usize, PairGeometry> = HashMap::new();
            let (si, chi) = labels[i];
            for j in 0..pts.len() {
                let (sj, chj) = labels[j];
                let geo = cache
                    .entry(sj)
                    .or_insert_with(|| PairGeometry::new(&lifts[si], &lifts[sj]));
                let fast = if geo.compatible(chi, chj) {
                    pow2(geo.log_sigma(k, w))
                } else {
                    Rational::zero()
                };
                let trace = principal_power_sums_in(None, &pts[i], &pts[j], 1).expect("same shape")[0].clone();
                if fast != trace {
                    bad += 1;
                }
            }
            bad
        })
        .sum();
    Ok(PathAgreement {
        pairs: pts.len() * pts.len(),
        mismatches,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GeneratorKind {
    /// `e_u -> (-1)^q(u) e_u`
    Diagonal,
    /// `e_u -> e_phi(u)`, `phi` affine
    Permutation,
    /// `h` on the first tensor factor
    Hadamard,
    /// `h (x) h` on the first two tensor factors
    DoubleHadamard,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub kind: GeneratorKind,
    pub matrix: QuadMatrix,
    /// member of the rational subgroup (diagonal, permutation and `H_2`)
    pub rational_subgroup: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSet {
    pub k: usize,
    pub generators: Vec<Generator>,
}

impl GeneratorSet {
    pub fn rational_subset(&self) -> Vec<QuadMatrix> {
        self.generators
            .iter()
            .filter(|g| g.rational_subgroup)
            .map(|g| g.matrix.clone())
            .collect()
    }

    pub fn all(&self) -> Vec<QuadMatrix> {
        self.generators.iter().map(|g| g.matrix.clone()).collect()
    }
}

fn permutation_matrix(n: usize, phi: impl Fn(usize) -> usize) -> QuadMatrix {
    QuadMatrix::from_fn(n, n, |i, j| if phi(j) == i { QuadExt::one() } else { QuadExt::zero() })
}

fn diagonal_matrix(n: usize, q: impl Fn(usize) -> bool) -> QuadMatrix {
    QuadMatrix::from_fn(n, n, |i, j| {
        if i != j {
            QuadExt::zero()
        } else if q(i) {
            QuadExt::rational(int(-1))
        } else {
            QuadExt::one()
        }
    })
}

/// Generators of the Clifford group on `R^(2^k)`, tensor factor `i` being bit `i` of `u`.
pub fn clifford_generators(k: usize) -> Result<GeneratorSet> {
    if !(1..=4).contains(&k) {
        return Err(Error::InvalidArgument(format!("k = {k} outside 1..=4")));
    }
    let n = 1usize << k;
    let bit = |u: usize, i: usize| u >> i & 1 == 1;
    let mut gens = Vec::new();
    for i in 0..k {
        gens.push(Generator {
            name: format!("diag(u{i})"),
            kind: GeneratorKind::Diagonal,
            matrix: diagonal_matrix(n, |u| bit(u, i)),
            rational_subgroup: true,
        });
        for j in i + 1..k {
            gens.push(Generator {
                name: format!("diag(u{i}u{j})"),
                kind: GeneratorKind::Diagonal,
                matrix: diagonal_matrix(n, |u| bit(u, i) && bit(u, j)),
                rational_subgroup: true,
            });
        }
    }
    for i in 0..k {
        gens.push(Generator {
            name: format!("translate(e{i})"),
            kind: GeneratorKind::Permutation,
            matrix: permutation_matrix(n, |u| u ^ (1 << i)),
            rational_subgroup: true,
        });
        for j in 0..k {
            if i != j {
                gens.push(Generator {
                    name: format!("transvect(u{i} += u{j})"),
                    kind: GeneratorKind::Permutation,
                    matrix: permutation_matrix(n, |u| if bit(u, j) { u ^ (1 << i) } else { u }),
                    rational_subgroup: true,
                });
            }
        }
    }
    let inv_sqrt2 = QuadExt::new(Rational::zero(), Rational::new(BigInt::one(), BigInt::from(2)));
    let hadamard = QuadMatrix::from_fn(n, n, |i, j| {
        if (i ^ j) >> 1 != 0 {
            QuadExt::zero()
        } else if i & j & 1 == 1 {
            -&inv_sqrt2
        } else {
            inv_sqrt2.clone()
        }
    });
    gens.push(Generator {
        name: "H".into(),
        kind: GeneratorKind::Hadamard,
        matrix: hadamard,
        rational_subgroup: false,
    });
    if k >= 2 {
        let half = QuadExt::rational(Rational::new(BigInt::one(), BigInt::from(2)));
        let h2 = QuadMatrix::from_fn(n, n, |i, j| {
            if (i ^ j) >> 2 != 0 {
                QuadExt::zero()
            } else if parity((i & j & 3) as u64) == 1 {
                -&half
            } else {
                half.clone()
            }
        });
        gens.push(Generator {
            name: "H2".into(),
            kind: GeneratorKind::DoubleHadamard,
            matrix: h2,
            rational_subgroup: true,
        });
    }
    Ok(GeneratorSet { k, generators: gens })
}

/// Closure of `{seed}` under rational generators, deduplicated by canonical form.
pub fn orbit(gens: &[QuadMatrix], seed: &Subspace, cap: usize) -> Result<Configuration> {
    let rational: Vec<RatMatrix> = gens
        .iter()
        .map(|g| {
            g.to_rational()
                .ok_or_else(|| Error::Unsupported("orbit needs rational generators".into()))
        })
        .collect::<Result<_>>()?;
    if let Some(g) = rational.iter().find(|g| g.shape() != (seed.ambient(), seed.ambient())) {
        return Err(Error::ShapeMismatch {
            op: "orbit",
            left: g.shape(),
            right: (seed.ambient(), seed.ambient()),
        });
    }
    let mut seen: HashSet<Subspace> = HashSet::from([seed.clone()]);
    let mut order = vec![seed.clone()];
    let mut frontier = vec![seed.clone()];
    while !frontier.is_empty() {
        let candidates: Vec<Subspace> = frontier
            .par_iter()
            .flat_map_iter(|p| rational.iter().map(move |g| p.transform(g).expect("orthogonal image")))
            .collect();
        let mut next = Vec::new();
        for c in candidates {
            if seen.insert(c.clone()) {
                if seen.len() > cap {
                    return Err(Error::CapExceeded { cap });
                }
                order.push(c.clone());
                next.push(c);
            }
        }
        frontier = next;
    }
    Configuration::new(order)
}

fn check_code_params(k: usize, d: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidArgument("coefficients need k >= 2".into()));
    }
    if d == 0 || !d.is_multiple_of(2) || d > 8 {
        return Err(Error::InvalidArgument(format!("d = {d} must be even and at most 8")));
    }
    Ok(())
}

fn code_r(k: usize, d: usize, dim_c: usize) -> Result<i64> {
    check_code_params(k, d)?;
    if dim_c < 1 || dim_c > k + 1 || 2 * dim_c > d {
        return Err(Error::InvalidArgument(format!("code dimension {dim_c} out of range")));
    }
    Ok((d / 2) as i64 - dim_c as i64)
}

/// `(a_1, a_2, a_4)` from the closed forms with `r = d/2 - dim C`.
pub fn tensor_coeffs(k: usize, d: usize, dim_c: usize) -> Result<(Rational, Rational, Rational)> {
    let r = code_r(k, d, dim_c)?;
    Ok(closed_form(k, r))
}

fn closed_form(k: usize, r: i64) -> (Rational, Rational, Rational) {
    let one = Rational::one();
    let p = pow2(-2 * r);
    let n2 = pow2(2 * r) - &one;
    let n2m = pow2(2 * r - 2) - &one;
    let ka = pow2(k as i64) - &one;
    let kb = pow2(k as i64 - 1) - &one;
    let a1 = &p * (&one + int(2) * &n2 * &n2m / (&ka * &kb) - int(3) * &n2 / &ka);
    let a2 = int(3) * &p / &ka * (&one - &n2m / &kb);
    let a4 = int(3) * &p / (&ka * &kb);
    (a1, a2, a4)
}

/// Closed forms indexed directly by `r >= 0` (needs `k >= 2`).
pub fn tensor_coeffs_for_r(k: usize, r: u32) -> Result<(Rational, Rational, Rational)> {
    if k < 2 {
        return Err(Error::InvalidArgument("coefficients need k >= 2".into()));
    }
    Ok(closed_form(k, i64::from(r)))
}

/// The three-equation system indexed directly by `r >= 0`.
pub fn tensor_coeffs_from_system_for_r(k: usize, r: u32) -> Result<(Rational, Rational, Rational)> {
    if k < 2 {
        return Err(Error::InvalidArgument("coefficients need k >= 2".into()));
    }
    solve_system(k, i64::from(r))
}

/// The same coefficients by solving the three inner-product equations.
pub fn tensor_coeffs_from_system(k: usize, d: usize, dim_c: usize) -> Result<(Rational, Rational, Rational)> {
    let r = code_r(k, d, dim_c)?;
    solve_system(k, r)
}

fn solve_system(k: usize, r: i64) -> Result<(Rational, Rational, Rational)> {
    let one = Rational::one();
    let p = pow2(-2 * r);
    let n2 = pow2(2 * r) - &one;
    let n2m = pow2(2 * r - 2) - &one;
    let n4 = &n2 * &n2m / int(3);
    let k2 = pow2(k as i64);
    let k4 = &k2 * &k2;
    let m = RatMatrix::from_rows(vec![
        vec![one.clone(), n2.clone(), n4.clone()],
        vec![one.clone(), &k2 + &n2 - &one, &n2m * &k2 + &n4 - &n2m],
        vec![
            one.clone(),
            int(3) * &k2 + &n2 - int(3),
            &k4 + (int(3) * &n2m - int(3)) * &k2 + &n4 - int(3) * &n2m + int(2),
        ],
    ])?;
    let rhs = [p.clone(), int(4) * &p, int(16) * &p];
    let inv = m.inverse()?;
    let sol: Vec<Rational> = (0..3)
        .map(|i| (0..3).map(|j| inv.get(i, j) * &rhs[j]).sum())
        .collect();
    Ok((sol[0].clone(), sol[1].clone(), sol[2].clone()))
}

/// Binary code of length `d` (canonical RREF generator words).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BinaryCode {
    pub dim: usize,
    pub basis: Vec<u64>,
}

impl BinaryCode {
    pub fn contains(&self, v: u64) -> bool {
        let mut x = v;
        for &b in &self.basis {
            if x >> b.trailing_zeros() & 1 == 1 {
                x ^= b;
            }
        }
        x == 0
    }

    pub fn contains_code(&self, other: &BinaryCode) -> bool {
        other.basis.iter().all(|&v| self.contains(v))
    }
}

/// Codes `1 ⊆ C ⊆ C^perp` of length `d` with `dim C <= max_dim`, by increasing dimension.
pub fn self_orthogonal_codes(d: usize, max_dim: usize) -> Vec<BinaryCode> {
    let ones = (1u64 << d) - 1;
    let mut layer = vec![BinaryCode {
        dim: 1,
        basis: vec![ones],
    }];
    let mut all = layer.clone();
    while let Some(first) = layer.first() {
        if first.dim >= max_dim.min(d / 2) {
            break;
        }
        let mut next: HashSet<BinaryCode> = HashSet::new();
        for c in &layer {
            for v in 1..=ones {
                if parity(v) != 0 || c.basis.iter().any(|&b| parity(b & v) != 0) || c.contains(v) {
                    continue;
                }
                let mut rows = c.basis.clone();
                rows.push(v);
                next.insert(BinaryCode {
                    dim: c.dim + 1,
                    basis: rref_words(rows),
                });
            }
        }
        let mut next: Vec<BinaryCode> = next.into_iter().collect();
        next.sort();
        all.extend(next.iter().cloned());
        layer = next;
    }
    all
}

/// The code-indexed matrix of the `H_2` action and its fixed space.
#[derive(Clone, Debug)]
pub struct CodeMatrix {
    pub k: usize,
    pub d: usize,
    pub codes: Vec<BinaryCode>,
    pub matrix: RatMatrix,
    /// RREF basis of `{x : x A = x}`
    pub fixed_space: RatMatrix,
}

impl CodeMatrix {
    pub fn self_dual_indices(&self) -> Vec<usize> {
        (0..self.codes.len()).filter(|&i| 2 * self.codes[i].dim == self.d).collect()
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.matrix.rows()).all(|i| (0..i).all(|j| self.matrix.get(i, j).is_zero()))
    }

    /// Fixed space equals the span of the unit vectors at self-dual codes.
    pub fn fixed_space_is_self_dual_only(&self) -> bool {
        let sd = self.self_dual_indices();
        let units = RatMatrix::from_fn(sd.len(), self.codes.len(), |i, j| if sd[i] == j { int(1) } else { int(0) });
        units.row_space() == self.fixed_space
    }

    /// Fixed basis vectors that are not unit vectors at self-dual codes.
    pub fn extra_fixed_vectors(&self) -> Vec<Vec<Rational>> {
        let sd: HashSet<usize> = self.self_dual_indices().into_iter().collect();
        self.fixed_space
            .row_vecs()
            .into_iter()
            .filter(|row| {
                let support: Vec<usize> = (0..row.len()).filter(|&j| !row[j].is_zero()).collect();
                !(support.len() == 1 && sd.contains(&support[0]))
            })
            .collect()
    }

    /// For each code dimension present, the common coefficient of `v` on codes
    /// of that dimension (`None` when the coefficients differ).
    pub fn coefficients_by_dimension(&self, v: &[Rational]) -> Vec<(usize, Option<Rational>)> {
        let mut dims: Vec<usize> = self.codes.iter().map(|c| c.dim).collect();
        dims.dedup();
        dims.into_iter()
            .map(|dim| {
                let vals: Vec<&Rational> = (0..self.codes.len())
                    .filter(|&i| self.codes[i].dim == dim)
                    .map(|i| &v[i])
                    .collect();
                let same = vals.windows(2).all(|w| w[0] == w[1]);
                (dim, same.then(|| vals[0].clone()))
            })
            .collect()
    }
}

pub fn h2_code_matrix(k: usize, d: usize) -> Result<CodeMatrix> {
    check_code_params(k, d)?;
    if k > 3 {
        return Err(Error::InvalidArgument("code matrix supported for k <= 3".into()));
    }
    let codes = self_orthogonal_codes(d, k + 1);
    let n = codes.len();
    let mut a = RatMatrix::zeros(n, n);
    for (i, c) in codes.iter().enumerate() {
        let r = (d / 2) as i64 - c.dim as i64;
        let (a1, a2, a4) = closed_form(k, r);
        a.set(i, i, a1);
        for (j, e) in codes.iter().enumerate().skip(i + 1) {
            if e.contains_code(c) {
                match e.dim - c.dim {
                    1 => a.set(i, j, a2.clone()),
                    2 => a.set(i, j, a4.clone()),
                    _ => {}
                }
            }
        }
    }
    let shifted = a.transpose().checked_sub(&RatMatrix::identity(n))?;
    let fixed_space = shifted.kernel().row_space();
    Ok(CodeMatrix {
        k,
        d,
        codes,
        matrix: a,
        fixed_space,
    })
}
