//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs with `harness = false`. The process fails when any criterion fails,
//! except those listed in `UNATTAINABLE`, which must still be run and must
//! still fail; a listed criterion that starts passing is also an error.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use grassdex::binquad::{enumerate_isotropic, is_spread, orbital, spread, SigmaSet};
use grassdex::clifford::{
    build_design, compare_sigma_paths, h2_code_matrix, tensor_coeffs, tensor_coeffs_for_r, tensor_coeffs_from_system,
    tensor_coeffs_from_system_for_r, verify_tt_with,
};
use grassdex::exactalg::rational::{pow2, to_f64};
use grassdex::exactalg::{int, ratio, RatMatrix, Rational};
use grassdex::grassmann::{expected_constant, principal_power_sums, verify_design, zonal_positivity, Configuration, Subspace};
use grassdex::lattice::{barnes_wall, barnes_wall_normalized, catalog, check_eutaxy, check_perfection, minimal_sections, Lattice};
use grassdex::zonal::{moment_oracle_with, OracleValue, Partition};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that cannot be met as stated, with the reason.
const UNATTAINABLE: &[(u32, &str)] = &[(
    8,
    "a spread of totally isotropic 3-spaces for k = 3 does not exist (exhaustive search; two disjoint \
     maximal subspaces lie in opposite families, so at most two are pairwise disjoint)",
)];

struct Check {
    ok: bool,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self { ok: true, notes: vec![] }
    }

    fn expect(&mut self, cond: bool, what: impl Into<String>) {
        let what = what.into();
        if cond {
            self.notes.push(what);
        } else {
            self.ok = false;
            self.notes.push(format!("NOT {what}"));
        }
    }
}

fn lines_of(name: &str) -> (Lattice, Configuration) {
    let l = catalog(name).unwrap();
    let s = minimal_sections(&l, 1, None).unwrap();
    let cfg = s.configuration(&l).unwrap();
    (l, cfg)
}

/// Product formula for `E[cos^(2t)]` between random lines of R^n, written out independently.
fn beta_moment(n: i64, t: i64) -> Rational {
    let mut acc = Rational::one();
    for i in 0..t {
        acc *= ratio(2 * i + 1, n + 2 * i);
    }
    acc
}

fn c1(c: &mut Check) {
    let mut total = 0;
    let mut good = 0;
    for k in 2..=4usize {
        for s in 0..k {
            let w = k - s;
            let x = enumerate_isotropic(k, w).unwrap();
            let elems: Vec<HashSet<u64>> = x.members().iter().map(|m| m.elements().into_iter().collect()).collect();
            let sizes: Vec<u64> = elems
                .iter()
                .flat_map(|a| elems.iter().map(move |b| a.intersection(b).count() as u64))
                .collect();
            let pairs = Rational::from_integer((sizes.len() as u64).into());
            for t in 1..=3u32 {
                let lhs = pow2(-((2 * s as i64 - k as i64) * i64::from(t))) * expected_constant(1 << s, 1 << k, t).unwrap();
                let sum: Rational = sizes.iter().map(|&z| int(z.pow(t - 1) as i64)).sum();
                total += 1;
                if lhs == sum / &pairs {
                    good += 1;
                }
            }
        }
    }
    c.expect(good == total, format!("{good}/{total} (k,s,t) triples satisfy the bridge identity"));
}

fn c2(c: &mut Check) {
    let (_, cfg) = lines_of("D4");
    c.expect(cfg.len() == 12, format!("{} lines", cfg.len()));
    let r = verify_design(&cfg, 3).unwrap();
    c.expect(r.is_design(2), "4-design certified");
    c.expect(!r.is_design(3), "6-design refuted");
}

fn c3(c: &mut Check) {
    let (_, cfg) = lines_of("E8");
    c.expect(cfg.len() == 120, format!("{} lines", cfg.len()));
    let r = verify_design(&cfg, 4).unwrap();
    c.expect(r.is_design(3), "6-design certified");
    let l4 = r.level(4).unwrap();
    c.expect(l4.expected_c == beta_moment(8, 4) && l4.expected_c == ratio(1, 128), "c_{1,8}(8) = 1/128");
    c.expect(!l4.is_design, format!("8-design refuted (average {})", grassdex::exactalg::format_rational(&l4.average_sigma_t)));
}

fn c4(c: &mut Check) {
    let l = catalog("E8").unwrap();
    let s = minimal_sections(&l, 2, None).unwrap();
    c.expect(s.delta == int(3), format!("delta_2 = {}", s.delta));
    let cfg = s.configuration(&l).unwrap();
    c.expect(true, format!("{} minimal 2-sections", cfg.len()));
    c.expect(verify_design(&cfg, 2).unwrap().is_design(2), "4-design in G(2,8)");
    let p = check_perfection(&l, &s);
    c.expect(p.is_perfect, format!("perfect (rank {}/{})", p.rank, p.required));
    c.expect(check_eutaxy(&l, &s).unwrap().is_eutactic, "eutactic");
}

fn c5(c: &mut Check) {
    let l = barnes_wall_normalized(4).unwrap();
    c.expect(l.minimum() == int(4), format!("min = {}", l.minimum()));
    c.expect(l.det() == int(256), format!("det = {}", l.det()));
    let s = minimal_sections(&l, 1, None).unwrap();
    let cfg = s.configuration(&l).unwrap();
    c.expect(cfg.len() == 2160, format!("{} lines", cfg.len()));
    c.expect(verify_design(&cfg, 3).unwrap().is_design(3), "6-design certified");
}

/// Four minimal vectors of `l` whose Gram matrix is `target` and which span `l`.
fn find_isometric_basis(l: &Lattice, target: &RatMatrix) -> bool {
    let mins: Vec<Vec<Rational>> = l
        .minimal_vectors(false)
        .into_iter()
        .map(|v| v.into_iter().map(Rational::from_integer).collect())
        .collect();
    let gram = l.gram();
    let dot = |a: &[Rational], b: &[Rational]| -> Rational {
        let mut acc = Rational::zero();
        for i in 0..a.len() {
            for j in 0..b.len() {
                acc += &a[i] * gram.get(i, j) * &b[j];
            }
        }
        acc
    };
    let n = target.rows();
    let mut chosen: Vec<usize> = Vec::new();
    fn search(
        chosen: &mut Vec<usize>,
        n: usize,
        mins: &[Vec<Rational>],
        target: &RatMatrix,
        dot: &dyn Fn(&[Rational], &[Rational]) -> Rational,
    ) -> bool {
        let i = chosen.len();
        if i == n {
            return true;
        }
        for cand in 0..mins.len() {
            if (0..i).all(|j| dot(&mins[chosen[j]], &mins[cand]) == *target.get(j, i)) {
                chosen.push(cand);
                if search(chosen, n, mins, target, dot) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    // equal determinants make the chosen vectors a basis, not just a sublattice
    l.det() == target.det().unwrap() && search(&mut chosen, n, &mins, target, &dot)
}

fn c6(c: &mut Check) {
    let raw = barnes_wall(2).unwrap();
    let bw4 = barnes_wall_normalized(2).unwrap();
    let d4 = catalog("D4").unwrap();
    c.expect(
        raw.gram() == &bw4.gram().scale(&int(2)),
        "normalized BW4 is the raw lattice with norms halved",
    );
    c.expect(find_isometric_basis(&bw4, d4.gram()), "normalized BW4 has a basis with the D4 Gram matrix");
    let bw8 = barnes_wall_normalized(3).unwrap();
    c.expect(bw8.is_even() && bw8.det() == int(1), "BW8 even unimodular");
    let roots = bw8.minimal_vectors(false);
    c.expect(bw8.minimum() == int(2) && roots.len() == 240, format!("{} vectors of norm {}", roots.len(), bw8.minimum()));
}

fn tt_case(c: &mut Check, label: &str, sigma: &SigmaSet, t: u32, expected_points: usize, pairwise: bool) {
    let build = build_design(sigma).unwrap();
    let r = verify_tt_with(sigma, &build, t).unwrap();
    c.expect(
        r.design_size == expected_points,
        format!("{label}: {} points of dim {}", r.design_size, 1usize << r.s),
    );
    c.expect(r.is_design(t), format!("{label}: {}-design", 2 * t));
    c.expect(r.identities_hold(), format!("{label}: fast and trace averages agree"));
    if pairwise {
        let agree = compare_sigma_paths(sigma, &build).unwrap();
        c.expect(agree.mismatches == 0, format!("{label}: {} pairs agree exactly", agree.pairs));
    }
}

fn c7(c: &mut Check) {
    tt_case(c, "k=2 w=1", &enumerate_isotropic(2, 1).unwrap(), 3, 18, true);
    tt_case(c, "k=3 w=3", &enumerate_isotropic(3, 3).unwrap(), 3, 240, true);
}

fn c8(c: &mut Check) {
    tt_case(c, "k=2 w=1 spread", &spread(2, 1).unwrap(), 2, 18, false);
    match spread(3, 3) {
        Ok(s) => tt_case(c, "k=3 w=3 spread", &s, 2, 40, false),
        Err(e) => c.expect(false, format!("k=3 w=3 spread: {e}")),
    }
    let s = spread(4, 2).unwrap();
    c.expect(s.len() == 45, format!("k=4 w=2 spread has {} members", s.len()));
    tt_case(c, "k=4 w=2 spread", &s, 2, 180, false);
}

fn c9(c: &mut Check) {
    let mut agree = true;
    let mut a1_rule = true;
    for k in 2..=4usize {
        for r in 0..=4u32 {
            let a = tensor_coeffs_for_r(k, r).unwrap();
            agree &= a == tensor_coeffs_from_system_for_r(k, r).unwrap();
            a1_rule &= (a.0 == int(1)) == (r == 0 || r as usize == k);
        }
        for d in [2, 4, 6, 8] {
            for dim in 1..=(d / 2).min(k + 1) {
                agree &= tensor_coeffs(k, d, dim).unwrap() == tensor_coeffs_from_system(k, d, dim).unwrap();
            }
        }
    }
    c.expect(agree, "closed forms equal the solved system for r <= 4, 2 <= k <= 4");
    c.expect(a1_rule, "a1 = 1 exactly when r is 0 or k");
    for d in [2, 4, 6] {
        let cm = h2_code_matrix(3, d).unwrap();
        c.expect(cm.fixed_space_is_self_dual_only(), format!("k=3 d={d}: fixed space spanned by self-dual codes"));
    }
    for (k, d, want) in [
        (2, 6, vec![int(1), ratio(-1, 12)]),
        (3, 8, vec![int(1), ratio(-1, 40), ratio(1, 480)]),
    ] {
        let cm = h2_code_matrix(k, d).unwrap();
        let extra = cm.extra_fixed_vectors();
        let got: Vec<Option<Rational>> = extra
            .first()
            .map(|v| cm.coefficients_by_dimension(v).into_iter().take(want.len()).map(|(_, x)| x).collect())
            .unwrap_or_default();
        let shown: Vec<String> = got
            .iter()
            .map(|x| x.as_ref().map_or("mixed".into(), grassdex::exactalg::format_rational))
            .collect();
        c.expect(
            extra.len() == 1 && got == want.into_iter().map(Some).collect::<Vec<_>>(),
            format!("k={k} d={d}: extra invariant coefficients ({})", shown.join(", ")),
        );
    }
}

fn random_configuration(rng: &mut ChaCha8Rng) -> Configuration {
    let m = rng.random_range(1..=2usize);
    let n = rng.random_range(2 * m.max(2)..=6);
    let size = rng.random_range(1..=8);
    let mut pts = Vec::new();
    while pts.len() < size {
        let rows: Vec<Vec<i64>> = (0..m).map(|_| (0..n).map(|_| rng.random_range(-3..=3)).collect()).collect();
        if let Ok(p) = Subspace::from_i64_rows(&rows) {
            if p.dim() == m {
                pts.push(p);
            }
        }
    }
    Configuration::new(pts).unwrap()
}

fn c10(c: &mut Check) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut positive = true;
    let mut sums_ok = true;
    for _ in 0..500 {
        let cfg = random_configuration(&mut rng);
        for mu in Partition::supported(cfg.m()).into_iter().filter(|mu| mu.degree() > 0) {
            positive &= zonal_positivity(&cfg, &mu).unwrap() >= int(0);
        }
        let pts = cfg.points();
        let (p, q) = (&pts[0], &pts[pts.len() - 1]);
        let a = principal_power_sums(p, q, 4).unwrap();
        sums_ok &= a == principal_power_sums(q, p, 4).unwrap();
        sums_ok &= a.windows(2).all(|w| w[1] <= w[0]) && a[0] <= int(cfg.m() as i64) && a[3] >= int(0);
    }
    c.expect(positive, "zonal sums nonnegative on 500 random configurations");
    c.expect(sums_ok, "power sums symmetric, bounded and decreasing in t");

    let mut spreads_ok = true;
    for (k, w) in [(2, 1), (2, 2), (3, 1), (4, 2), (4, 4)] {
        spreads_ok &= is_spread(&spread(k, w).unwrap());
    }
    c.expect(spreads_ok, "spreads for (2,1) (2,2) (3,1) (4,2) (4,4) valid");

    let mut orbital_ok = true;
    for (k, w) in [(3, 2), (4, 2), (4, 4)] {
        let x = enumerate_isotropic(k, w).unwrap();
        for _ in 0..300 {
            let a = &x.members()[rng.random_range(0..x.len())];
            let b = &x.members()[rng.random_range(0..x.len())];
            orbital_ok &= orbital(a, b).unwrap() == orbital(b, a).unwrap();
        }
    }
    c.expect(orbital_ok, "orbital symmetric");

    let mut worst: f64 = 0.0;
    for (m, n) in [(2, 4), (2, 8), (3, 8)] {
        for t in 1..=3 {
            let exact = to_f64(&expected_constant(m, n, t).unwrap());
            match moment_oracle_with(m, n, t, 200_000, 7 + t as u64) {
                OracleValue::Estimate { mean, std_error, .. } => worst = worst.max((mean - exact).abs() / std_error),
                OracleValue::Exact(v) => worst = worst.max(if to_f64(&v) == exact { 0.0 } else { f64::INFINITY }),
            }
        }
    }
    c.expect(worst <= 3.0, format!("Monte-Carlo within {worst:.2} standard errors"));
}

type Criterion = (u32, &'static str, Duration, fn(&mut Check));

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "constants bridge identity", Duration::from_secs(120), c1),
        (2, "D4 minimal lines", Duration::from_secs(1), c2),
        (3, "E8 minimal lines", Duration::from_secs(10), c3),
        (4, "E8 minimal 2-sections", Duration::from_secs(300), c4),
        (5, "BW16 minimal lines", Duration::from_secs(600), c5),
        (6, "Barnes-Wall sanity", Duration::from_secs(60), c6),
        (7, "Clifford construction, full Sigma", Duration::from_secs(120), c7),
        (8, "spread designs", Duration::from_secs(600), c8),
        (9, "tensor coefficients and H2 fixed space", Duration::from_secs(60), c9),
        (10, "property suites", Duration::from_secs(300), c10),
    ];
    let mut unexpected = Vec::new();
    for (id, title, budget, f) in criteria {
        let mut check = Check::new();
        let start = Instant::now();
        f(&mut check);
        let elapsed = start.elapsed();
        check.expect(elapsed <= budget, format!("{:.2}s within {}s", elapsed.as_secs_f64(), budget.as_secs()));
        let known = UNATTAINABLE.iter().find(|(n, _)| *n == id);
        let verdict = if check.ok { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {verdict}  {title}: {}", check.notes.join("; "));
        match (check.ok, known) {
            (false, Some((_, why))) => println!("             known unattainable: {why}"),
            (true, Some(_)) => unexpected.push(format!("criterion {id} listed as unattainable but passed")),
            (false, None) => unexpected.push(format!("criterion {id} failed")),
            (true, None) => {}
        }
    }
    if !unexpected.is_empty() {
        eprintln!("{}", unexpected.join("\n"));
        std::process::exit(1);
    }
}
