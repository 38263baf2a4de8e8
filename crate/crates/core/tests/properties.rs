use std::collections::HashSet;
use std::sync::OnceLock;

use grassdex::binquad::{check_iso_design, enumerate_isotropic, orbital, spread, SigmaSet};
use grassdex::clifford::{eigenspaces, PauliOp};
use grassdex::exactalg::rational::pow;
use grassdex::exactalg::{int, ratio, solve_nonneg_combination, QuadExt, RatMatrix, Rational};
use grassdex::grassmann::{principal_power_sums, projector, verify_design, zonal_positivity, Configuration, Subspace};
use grassdex::lattice::{catalog, minimal_sections, short_vectors, Lattice};
use grassdex::zonal::{constant_c, line_moment, Partition};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| ratio(p, q))
}

fn rat_matrix(rows: usize, cols: usize) -> impl Strategy<Value = RatMatrix> {
    prop::collection::vec(small_rational(), rows * cols).prop_map(move |v| RatMatrix::new(rows, cols, v).unwrap())
}

fn int_rows(rows: usize, cols: usize, range: i64) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-range..=range, cols), rows)
}

fn subspace(m: usize, n: usize) -> impl Strategy<Value = Subspace> {
    int_rows(m, n, 3)
        .prop_filter("full rank", move |rows| RatMatrix::from_i64_rows(rows).rank() == m)
        .prop_map(|rows| Subspace::from_i64_rows(&rows).unwrap())
}

fn signed_permutations3() -> Vec<RatMatrix> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::new();
    for p in perms {
        for signs in 0..8u32 {
            out.push(RatMatrix::from_fn(3, 3, |i, j| {
                if p[j] != i {
                    int(0)
                } else if signs >> j & 1 == 1 {
                    int(-1)
                } else {
                    int(1)
                }
            }));
        }
    }
    out
}

fn cached_x(k: usize, w: usize) -> &'static SigmaSet {
    static CACHE: OnceLock<Vec<((usize, usize), SigmaSet)>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        let mut v = Vec::new();
        for k in 1..=4 {
            for w in 1..=k {
                v.push(((k, w), enumerate_isotropic(k, w).unwrap()));
            }
        }
        v
    });
    &all.iter().find(|(key, _)| *key == (k, w)).unwrap().1
}

fn unimodular(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec((0..n, 0..n, -2i64..=2), 0..6).prop_map(move |ops| {
        let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        for (i, j, c) in ops {
            if i != j {
                for col in 0..n {
                    u[i][col] += c * u[j][col];
                }
            }
        }
        u
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rref_is_idempotent(m in rat_matrix(3, 4)) {
        let r = m.rref().matrix;
        prop_assert_eq!(r.rref().matrix, r);
    }

    #[test]
    fn det_is_multiplicative(a in rat_matrix(3, 3), b in rat_matrix(3, 3)) {
        prop_assert_eq!((&a * &b).det().unwrap(), a.det().unwrap() * b.det().unwrap());
    }

    #[test]
    fn trace_pow_adds_over_blocks(a in rat_matrix(2, 2), b in rat_matrix(3, 3), t in 1u32..=4) {
        let block = a.block_diag(&b);
        prop_assert_eq!(block.trace_pow(t).unwrap(), a.trace_pow(t).unwrap() + b.trace_pow(t).unwrap());
    }

    #[test]
    fn nonneg_combination_reproduces_goal(
        targets in prop::collection::vec(rat_matrix(2, 2), 1..5),
        weights in prop::collection::vec(0i64..=3, 5),
    ) {
        let targets: Vec<RatMatrix> = targets.iter().map(|m| &(m + &m.transpose()) * &RatMatrix::identity(2)).collect();
        let goal = targets.iter().zip(&weights).fold(RatMatrix::zeros(2, 2), |acc, (t, &w)| &acc + &t.scale(&int(w)));
        let found = solve_nonneg_combination(&targets, &goal, false).unwrap();
        let lambda = found.expect("goal is a nonnegative combination by construction");
        prop_assert!(lambda.iter().all(|x| !x.is_negative()));
        let back = targets.iter().zip(&lambda).fold(RatMatrix::zeros(2, 2), |acc, (t, w)| &acc + &t.scale(w));
        prop_assert_eq!(back, goal);
    }

    #[test]
    fn quadext_norm(a in small_rational(), b in small_rational()) {
        let x = QuadExt::new(a.clone(), b.clone());
        let prod = &x * &x.conj();
        prop_assert!(prod.is_rational());
        prop_assert_eq!(prod, QuadExt::rational(&a * &a - int(2) * &b * &b));
    }

    #[test]
    fn constant_c_basic_bounds(m in 1usize..=4, extra in 0usize..=12, t in 1u32..=3) {
        let n = 2 * m + extra;
        let c = constant_c(m, n, t).unwrap();
        prop_assert!(c > int(0));
        prop_assert!(c <= pow(&int(m as i64), t));
        prop_assert_eq!(constant_c(m, n, 1).unwrap(), ratio((m * m) as i64, n as i64));
    }

    #[test]
    fn power_sums_symmetric_bounded_monotone(p in subspace(2, 5), q in subspace(2, 5)) {
        let a = principal_power_sums(&p, &q, 4).unwrap();
        let b = principal_power_sums(&q, &p, 4).unwrap();
        prop_assert_eq!(&a, &b);
        for t in 0..a.len() {
            prop_assert!(a[t] >= int(0) && a[t] <= int(2));
            if t + 1 < a.len() {
                prop_assert!(a[t + 1] <= a[t]);
            }
        }
    }

    #[test]
    fn power_sums_invariant_under_signed_permutations(
        p in subspace(1, 3), q in subspace(1, 3), g in 0usize..48,
    ) {
        let g = &signed_permutations3()[g];
        let a = principal_power_sums(&p, &q, 3).unwrap();
        let b = principal_power_sums(&p.transform(g).unwrap(), &q.transform(g).unwrap(), 3).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn orbit_multiset_matches_deduplicated_set(seed in subspace(1, 3)) {
        let images: Vec<Subspace> = signed_permutations3().iter().map(|g| seed.transform(g).unwrap()).collect();
        let multi = Configuration::new(images.clone()).unwrap();
        let distinct: Vec<Subspace> = images.into_iter().collect::<HashSet<_>>().into_iter().collect();
        let set = Configuration::new(distinct).unwrap();
        let a = verify_design(&multi, 3).unwrap();
        let b = verify_design(&set, 3).unwrap();
        prop_assert_eq!(&a.levels, &b.levels);
        prop_assert!(a.is_design(1));
        let sum = multi.points().iter().map(projector).fold(RatMatrix::zeros(3, 3), |acc, p| &acc + &p);
        prop_assert_eq!(sum, RatMatrix::identity(3).scale(&ratio(multi.len() as i64, 3)));
    }

    #[test]
    fn delta_one_is_the_minimum(rows in int_rows(3, 3, 3)) {
        let basis = RatMatrix::from_i64_rows(&rows);
        prop_assume!(!basis.det().unwrap().is_zero());
        let l = Lattice::from_basis(basis).unwrap();
        let s = minimal_sections(&l, 1, None).unwrap();
        prop_assert_eq!(s.delta, l.minimum());
    }

    #[test]
    fn short_vectors_are_symmetric(rows in int_rows(3, 3, 2), bound in 1i64..=8) {
        let basis = RatMatrix::from_i64_rows(&rows);
        prop_assume!(!basis.det().unwrap().is_zero());
        let l = Lattice::from_basis(basis).unwrap();
        let vs: HashSet<Vec<BigInt>> = short_vectors(&l, &int(bound), false).into_iter().collect();
        for v in &vs {
            let neg: Vec<BigInt> = v.iter().map(|x| -x).collect();
            prop_assert!(vs.contains(&neg));
        }
    }

    #[test]
    fn orbital_is_symmetric(k in 2usize..=4, wsel in 0usize..4, i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let w = 1 + wsel % k;
        let x = cached_x(k, w);
        let (a, b) = (&x.members()[i.index(x.len())], &x.members()[j.index(x.len())]);
        prop_assert_eq!(orbital(a, b).unwrap(), orbital(b, a).unwrap());
    }

    #[test]
    fn pauli_product_matches_matrices(k in 1usize..=3, a in any::<u64>(), b in any::<u64>(), c in any::<u64>(), d in any::<u64>()) {
        let mask = (1u64 << k) - 1;
        let g = PauliOp::new(k, a & mask, b & mask, 1).unwrap();
        let h = PauliOp::new(k, c & mask, d & mask, -1).unwrap();
        prop_assert_eq!(g.compose(&h).matrix(), &g.matrix() * &h.matrix());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn delta_two_is_unimodular_invariant(u in unimodular(4)) {
        let d4 = catalog("D4").unwrap();
        let moved = d4.transformed(&u).unwrap();
        prop_assert_eq!(minimal_sections(&moved, 2, None).unwrap().delta, int(3));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn zonal_sums_are_nonnegative(m in 1usize..=2, extra in 0usize..=2, size in 1usize..=6, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let n = (2 * m).max(3) + extra;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut pts = Vec::new();
        while pts.len() < size {
            let rows: Vec<Vec<i64>> = (0..m).map(|_| (0..n).map(|_| rng.random_range(-3..=3)).collect()).collect();
            if let Ok(p) = Subspace::from_i64_rows(&rows) {
                if p.dim() == m {
                    pts.push(p);
                }
            }
        }
        let cfg = Configuration::new(pts).unwrap();
        for mu in Partition::supported(m).into_iter().filter(|mu| mu.degree() > 0) {
            prop_assert!(zonal_positivity(&cfg, &mu).unwrap() >= int(0));
        }
        prop_assert!(verify_design(&cfg, 2).unwrap().zonal_consistent);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn iso_inequality_on_random_subsets(
        k in 1usize..=4,
        wsel in 0usize..4,
        picks in prop::collection::vec(any::<prop::sample::Index>(), 1..10),
    ) {
        let w = 1 + wsel % k;
        let x = cached_x(k, w);
        let mut chosen: Vec<_> = picks.iter().map(|i| x.members()[i.index(x.len())].clone()).collect();
        chosen.sort();
        chosen.dedup();
        let sigma = SigmaSet::new(k, w, chosen).unwrap();
        for t in 0..=3 {
            prop_assert!(check_iso_design(&sigma, t).unwrap().inequality_holds, "k={} w={} t={}", k, w, t);
        }
    }
}

#[test]
fn line_constant_matches_exact_moment() {
    for n in 2..=64 {
        for t in 1..=3 {
            assert_eq!(constant_c(1, n, t).unwrap(), line_moment(n, t), "n={n} t={t}");
        }
    }
}

#[test]
fn isotropic_enumeration_is_exhaustive_and_counted() {
    for k in 1..=4 {
        for w in 1..=k {
            let x = cached_x(k, w);
            for s in x.members() {
                let sp = s.space();
                assert!(s.elements().iter().all(|&v| sp.q(v) == 0));
            }
        }
    }
    for k in 1..=5usize {
        let expected = ((1u64 << k) - 1) * ((1u64 << (k - 1)) + 1);
        assert_eq!(enumerate_isotropic(k, 1).unwrap().len() as u64, expected, "k={k}");
    }
}

#[test]
fn spreads_are_valid() {
    for (k, w) in [(2, 1), (2, 2), (3, 1), (4, 2), (4, 4)] {
        let s = spread(k, w).unwrap();
        for (i, a) in s.members().iter().enumerate() {
            for b in &s.members()[..i] {
                assert_eq!(a.meet_dim(b), 0);
            }
        }
        let covered = s.len() as u64 * ((1u64 << w) - 1);
        assert_eq!(covered, ((1u64 << k) - 1) * ((1u64 << (k - 1)) + 1), "k={k} w={w}");
    }
}

#[test]
fn eigenspace_decompositions_are_complete() {
    for (k, w) in [(2, 1), (2, 2), (3, 1), (3, 3)] {
        for s in cached_x(k, w).members().iter().take(6) {
            let cfg = eigenspaces(s).unwrap();
            let projs: Vec<RatMatrix> = cfg.points().iter().map(projector).collect();
            let total = projs.iter().fold(RatMatrix::zeros(1 << k, 1 << k), |acc, p| &acc + p);
            assert_eq!(total, RatMatrix::identity(1 << k));
            for i in 0..projs.len() {
                for j in 0..i {
                    assert!((&projs[i] * &projs[j]).is_zero());
                }
            }
        }
    }
}

#[test]
fn strong_perfection_chain_on_catalog_lattices() {
    use grassdex::lattice::{check_eutaxy, check_perfection};
    for (name, m) in [("D4", 1), ("E6", 1), ("E7", 1), ("E8", 1), ("D4", 2)] {
        let l = catalog(name).unwrap();
        let s = minimal_sections(&l, m, None).unwrap();
        let cfg = s.configuration(&l).unwrap();
        if verify_design(&cfg, 2).unwrap().is_design(2) {
            assert!(check_perfection(&l, &s).is_perfect, "{name} m={m}");
            let eu = check_eutaxy(&l, &s).unwrap();
            assert!(eu.is_eutactic && eu.uniform, "{name} m={m}");
        }
    }
}
