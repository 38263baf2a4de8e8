//! Zonal (Jacobi) polynomials of degree at most two on pairs of m-subspaces of
//! R^n, the exact averages `c_{m,n}(2t)` of `sigma^t` for `t <= 3`, and an
//! independent moment oracle.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactalg::rational::{int, ratio, Rational};

/// A partition `mu_1 >= mu_2 >= ... > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        parts.retain(|&p| p > 0);
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!("parts must be weakly decreasing: {parts:?}")));
        }
        Ok(Self(parts))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn one() -> Self {
        Self(vec![1])
    }

    pub fn one_one() -> Self {
        Self(vec![1, 1])
    }

    pub fn two() -> Self {
        Self(vec![2])
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn length(&self) -> usize {
        self.0.len()
    }

    /// The nonempty partitions with an explicit polynomial, restricted to those
    /// of length at most `m`.
    pub fn supported(m: usize) -> Vec<Self> {
        let mut v = vec![Self::one(), Self::two()];
        if m >= 2 {
            v.insert(1, Self::one_one());
        }
        v
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Power-sum data of principal cosines squared: `p1 = sum y_i`, `p2 = sum y_i^2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSums {
    pub p1: Rational,
    pub p2: Rational,
}

impl PowerSums {
    /// `sum_{i<j} y_i y_j`
    pub fn e2(&self) -> Rational {
        (&self.p1 * &self.p1 - &self.p2) / int(2)
    }
}

/// `P_mu = (c_p2 * sum y^2 + c_e2 * sum y_i y_j + c_p1 * sum y + c_0)`; the
/// normalizer has already been divided in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZonalPolynomial {
    pub partition: Partition,
    pub m: usize,
    pub n: usize,
    pub beta: Rational,
    pub coeff_p2: Rational,
    pub coeff_e2: Rational,
    pub coeff_p1: Rational,
    pub constant: Rational,
}

impl ZonalPolynomial {
    pub fn eval(&self, sums: &PowerSums) -> Rational {
        &self.coeff_p2 * &sums.p2 + &self.coeff_e2 * sums.e2() + &self.coeff_p1 * &sums.p1 + &self.constant
    }

    /// Evaluates at explicit values `y_1..y_m`.
    pub fn eval_at(&self, ys: &[Rational]) -> Rational {
        let p1 = ys.iter().sum();
        let p2 = ys.iter().map(|y| y * y).sum();
        self.eval(&PowerSums { p1, p2 })
    }
}

fn check_dims(m: usize, n: usize) -> Result<()> {
    if m == 0 || 2 * m > n {
        return Err(Error::InvalidArgument(format!("need 1 <= m <= n/2, got m={m}, n={n}")));
    }
    Ok(())
}

/// The explicit zonal polynomial for `mu` in `{(), (1), (1,1), (2)}`.
pub fn jacobi_p(mu: &Partition, m: usize, n: usize) -> Result<ZonalPolynomial> {
    check_dims(m, n)?;
    if mu.degree() > 2 {
        return Err(Error::Unsupported(format!("zonal polynomial {mu} has degree > 2")));
    }
    if mu.length() > m {
        return Err(Error::InvalidArgument(format!("partition {mu} longer than m = {m}")));
    }
    let (mi, ni) = (m as i64, n as i64);
    let mr = int(mi);
    let nr = int(ni);
    let zero = int(0);
    let poly = match mu.parts() {
        [] => ZonalPolynomial {
            partition: mu.clone(),
            m,
            n,
            beta: int(1),
            coeff_p2: zero.clone(),
            coeff_e2: zero.clone(),
            coeff_p1: zero.clone(),
            constant: int(1),
        },
        [1] => {
            let beta = &mr * (int(1) - &mr / &nr);
            ZonalPolynomial {
                partition: mu.clone(),
                m,
                n,
                coeff_p2: zero.clone(),
                coeff_e2: zero.clone(),
                coeff_p1: beta.recip(),
                constant: -ratio(mi * mi, ni) / &beta,
                beta,
            }
        }
        [1, 1] => {
            let beta = ratio(mi * (mi - 1), 2)
                * (int(1) - ratio(2 * (mi - 1), ni - 2) + ratio(mi * (mi - 1), (ni - 1) * (ni - 2)));
            ZonalPolynomial {
                partition: mu.clone(),
                m,
                n,
                coeff_p2: zero.clone(),
                coeff_e2: beta.recip(),
                coeff_p1: -ratio((mi - 1) * (mi - 1), ni - 2) / &beta,
                constant: ratio(mi * mi * (mi - 1) * (mi - 1), 2 * (ni - 1) * (ni - 2)) / &beta,
                beta,
            }
        }
        [2] => {
            let beta = ratio(mi * (mi + 2), 3)
                * (int(1) - ratio(2 * (mi + 2), ni + 4) + ratio(mi * (mi + 2), (ni + 2) * (ni + 4)));
            ZonalPolynomial {
                partition: mu.clone(),
                m,
                n,
                coeff_p2: beta.recip(),
                coeff_e2: ratio(2, 3) / &beta,
                coeff_p1: -ratio(2 * (mi + 2) * (mi + 2), 3 * (ni + 4)) / &beta,
                constant: ratio(mi * mi * (mi + 2) * (mi + 2), 3 * (ni + 2) * (ni + 4)) / &beta,
                beta,
            }
        }
        _ => unreachable!("degree <= 2 partitions are (), (1), (1,1), (2)"),
    };
    Ok(poly)
}

/// `c_{m,n}(2t)`: the invariant-measure average of `sigma^t`, `t in {1,2,3}`.
pub fn constant_c(m: usize, n: usize, t: u32) -> Result<Rational> {
    check_dims(m, n)?;
    let (m, n) = (m as i64, n as i64);
    let lead = ratio(m * m, 3 * n);
    match t {
        1 => Ok(ratio(m * m, n)),
        2 => Ok(lead * (ratio(2 * (m - 1) * (m - 1), n - 1) + ratio((m + 2) * (m + 2), n + 2))),
        3 => {
            let third = ratio((m + 2) * (m + 2) * (2 * m + 3), (n + 2) * (n + 4));
            if m == 1 {
                // the (m-1) terms vanish, and n = 2 would make their denominators zero
                return Ok(lead * third);
            }
            let grouped = ratio(2 * n, n - 2) + ratio(n + 3, n + 4);
            let first = ratio((m - 1) * (m - 1) * (m + 2) * (m + 2), (n - 1) * (n + 2)) * grouped;
            let second = ratio(8 * m * (m - 1) * (m - 1), (n - 1) * (n - 2));
            Ok(lead * (first - second + third))
        }
        _ => Err(Error::Unsupported(format!("c_(m,n)(2t) is available for t in 1..=3, got t = {t}"))),
    }
}

/// Exact `E[cos^(2t)]` of the angle between a fixed and a uniformly random line of R^n:
/// `prod_{i<t} (1+2i)/(n+2i)`.
pub fn line_moment(n: usize, t: u32) -> Rational {
    (0..t as i64)
        .map(|i| ratio(1 + 2 * i, n as i64 + 2 * i))
        .product()
}

/// Outcome of [`moment_oracle`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum OracleValue {
    Exact(#[serde(with = "crate::exactalg::rational::serde_rational")] Rational),
    Estimate {
        mean: f64,
        std_error: f64,
        samples: usize,
        seed: u64,
    },
}

pub const DEFAULT_ORACLE_SAMPLES: usize = 1_000_000;
pub const DEFAULT_ORACLE_SEED: u64 = 0x6772_6173_7364_6578;

/// Independent estimate of `c_{m,n}(2t)`: exact for lines, sampled otherwise.
pub fn moment_oracle(m: usize, n: usize, t: u32) -> OracleValue {
    moment_oracle_with(m, n, t, DEFAULT_ORACLE_SAMPLES, DEFAULT_ORACLE_SEED)
}

pub fn moment_oracle_with(m: usize, n: usize, t: u32, samples: usize, seed: u64) -> OracleValue {
    if m == 1 {
        return OracleValue::Exact(line_moment(n, t));
    }
    // by invariance, fix p = span(e_1..e_m) and draw p' uniformly:
    // sigma(p, p') = squared Frobenius norm of the first m coordinates of an
    // orthonormal basis of p'
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    let mut basis = vec![vec![0.0f64; n]; m];
    for _ in 0..samples {
        for row in basis.iter_mut() {
            for x in row.iter_mut() {
                *x = StandardNormal.sample(&mut rng);
            }
        }
        gram_schmidt(&mut basis);
        let sigma: f64 = basis.iter().map(|row| row[..m].iter().map(|x| x * x).sum::<f64>()).sum();
        let v = sigma.powi(t as i32);
        sum += v;
        sum_sq += v * v;
    }
    let k = samples as f64;
    let mean = sum / k;
    let var = (sum_sq / k - mean * mean).max(0.0);
    OracleValue::Estimate {
        mean,
        std_error: (var / k).sqrt(),
        samples,
        seed,
    }
}

fn gram_schmidt(rows: &mut [Vec<f64>]) {
    for i in 0..rows.len() {
        for j in 0..i {
            let d: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
            let (head, tail) = rows.split_at_mut(i);
            for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                *x -= d * y;
            }
        }
        let norm = rows[i].iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in rows[i].iter_mut() {
            *x /= norm;
        }
    }
}
