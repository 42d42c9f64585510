//! Exact and near-exact checks of the identities behind the ln ln n estimate:
//! the bound on −ln(1−x), Abel summation, the step-function form of the
//! Stieltjes integral against π, Legendre's formula and the finite Euler
//! product over smooth numbers.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use thiserror::Error;

use crate::sieve::{validate_points, Sieve, SieveError};
use crate::sums::{accumulate_checkpoints, CompensatedAccumulator, UNIT_ROUNDOFF};

/// Relative tolerance for identities that are exact in real arithmetic.
pub const EXACT_TOLERANCE: f64 = 1e-12;

/// Relative tolerance for log sums with up to ~10^5 terms.
pub const LOG_SUM_TOLERANCE: f64 = 1e-10;

/// Largest `n` accepted by [`euler_product_check`].
pub const EULER_PRODUCT_MAX_N: u64 = 50;

/// Largest cutoff accepted by [`euler_product_check`]; keeps every `j` exact in binary64.
pub const EULER_PRODUCT_MAX_CUTOFF: u64 = 1 << 53;

/// Hard cap on how many smooth numbers one check may enumerate.
pub const SMOOTH_ENUMERATION_LIMIT: usize = 50_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IdentityError {
    #[error("{what}: argument {value} is outside the domain")]
    Domain { what: &'static str, value: f64 },
    #[error("sequence needs index {needed} but only {len} entries are present")]
    Index { needed: usize, len: usize },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{what}: {value} exceeds the supported maximum {max}")]
    TooLarge {
        what: &'static str,
        value: u64,
        max: u64,
    },
    #[error(transparent)]
    Sieve(#[from] SieveError),
}

/// Outcome of comparing two evaluations of one identity or inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityVerdict {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    pub pass: bool,
}

impl IdentityVerdict {
    /// Equality up to `tol`: relative when `|lhs| >= 1`, absolute below that.
    pub fn equality(lhs: f64, rhs: f64, tol: f64) -> Self {
        let (abs_diff, rel_diff) = diffs(lhs, rhs);
        let pass = if lhs.abs() < 1.0 {
            abs_diff <= tol
        } else {
            rel_diff <= tol
        };
        Self {
            lhs,
            rhs,
            abs_diff,
            rel_diff,
            pass,
        }
    }

    /// The inequality `lhs <= rhs + slack`.
    pub fn at_most(lhs: f64, rhs: f64, slack: f64) -> Self {
        let (abs_diff, rel_diff) = diffs(lhs, rhs);
        Self {
            lhs,
            rhs,
            abs_diff,
            rel_diff,
            pass: lhs <= rhs + slack,
        }
    }
}

fn diffs(lhs: f64, rhs: f64) -> (f64, f64) {
    let abs_diff = (lhs - rhs).abs();
    let scale = lhs.abs().max(rhs.abs());
    let rel_diff = if scale == 0.0 { 0.0 } else { abs_diff / scale };
    (abs_diff, rel_diff)
}

/// Checks `−ln(1−x) <= x + x²` for `0 <= x <= 1/2`.
pub fn log_one_minus_bound(x: f64) -> Result<IdentityVerdict, IdentityError> {
    if !(0.0..=0.5).contains(&x) {
        return Err(IdentityError::Domain {
            what: "log_one_minus_bound",
            value: x,
        });
    }
    let lhs = -(-x).ln_1p();
    let rhs = x + x * x;
    Ok(IdentityVerdict::at_most(lhs, rhs, 4.0 * UNIT_ROUNDOFF))
}

/// Finite sequences `f_1, f_2, …` and `g_1, g_2, …` with the index window `[m, n]`.
///
/// Entry `k` of each list is the term with index `k + 1`; both lists must
/// reach index `n + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequencePair {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub m: usize,
    pub n: usize,
}

impl SequencePair {
    pub fn new(f: Vec<f64>, g: Vec<f64>, m: usize, n: usize) -> Result<Self, IdentityError> {
        let pair = Self { f, g, m, n };
        pair.validate()?;
        Ok(pair)
    }

    fn validate(&self) -> Result<(), IdentityError> {
        if self.m < 1 || self.n < self.m {
            return Err(IdentityError::Domain {
                what: "sequence window",
                value: self.m as f64,
            });
        }
        let needed = self.n + 1;
        let len = self.f.len().min(self.g.len());
        if len < needed {
            return Err(IdentityError::Index { needed, len });
        }
        Ok(())
    }

    fn f(&self, i: usize) -> f64 {
        self.f[i - 1]
    }

    fn g(&self, i: usize) -> f64 {
        self.g[i - 1]
    }
}

/// Evaluates both sides of summation by parts:
/// `∑ f_i (g_{i+1} − g_i) = f_{n+1} g_{n+1} − f_m g_m − ∑ g_{i+1} (f_{i+1} − f_i)`.
pub fn abel_identity_eval(seq: &SequencePair) -> Result<IdentityVerdict, IdentityError> {
    seq.validate()?;
    let (m, n) = (seq.m, seq.n);
    let lhs: CompensatedAccumulator = (m..=n)
        .map(|i| seq.f(i) * (seq.g(i + 1) - seq.g(i)))
        .collect();
    let mut rhs = CompensatedAccumulator::new();
    rhs.add(seq.f(n + 1) * seq.g(n + 1));
    rhs.add(-(seq.f(m) * seq.g(m)));
    for i in m..=n {
        rhs.add(-(seq.g(i + 1) * (seq.f(i + 1) - seq.f(i))));
    }
    Ok(IdentityVerdict::equality(
        lhs.value(),
        rhs.value(),
        EXACT_TOLERANCE,
    ))
}

/// `S(x)` against `π(x)/x + ∫_{1.9}^x π(t)/t² dt` for one `x`.
pub fn stieltjes_identity_check(x: u64) -> Result<IdentityVerdict, IdentityError> {
    Ok(stieltjes_identity_grid(&Sieve::default(), &[x])?[0])
}

/// The Stieltjes check at every point of an ascending grid, from one sieve pass.
///
/// Because π is a step function the integral is the finite sum
/// `∑_k k · (1/p_k − 1/min(p_{k+1}, x))` over consecutive primes `p_k <= x`;
/// no quadrature is involved. The lower limit 1.9 contributes nothing since
/// π vanishes on `[1.9, 2)`.
pub fn stieltjes_identity_grid(
    sieve: &Sieve,
    points: &[u64],
) -> Result<Vec<IdentityVerdict>, IdentityError> {
    validate_points(points)?;
    if points[0] < 2 {
        return Err(IdentityError::Domain {
            what: "stieltjes_identity_check",
            value: points[0] as f64,
        });
    }
    let last = *points.last().expect("validated non-empty");
    let primes = sieve.primes_vec(last)?;
    let rows = accumulate_checkpoints(sieve, last, points)?;

    // integral prefix ∑_{k<K} k (p_{k+1} − p_k) / (p_k p_{k+1}) over the
    // primes below the current point, extended as the points ascend
    let mut prefix = CompensatedAccumulator::new();
    let mut below = 0usize;
    let mut out = Vec::with_capacity(rows.len());
    for row in &rows {
        while below < primes.len() && primes[below] <= row.x {
            if below > 0 {
                let (p, next) = (primes[below - 1], primes[below]);
                prefix.add(below as f64 * step_integral(p, next));
            }
            below += 1;
        }
        let mut rhs = prefix;
        rhs.add(below as f64 / row.x as f64);
        if below > 0 {
            rhs.add(below as f64 * step_integral(primes[below - 1], row.x));
        }
        out.push(IdentityVerdict::equality(
            row.s,
            rhs.value(),
            EXACT_TOLERANCE,
        ));
    }
    Ok(out)
}

/// `∫_a^b dt/t² = (b − a) / (a b)`.
fn step_integral(a: u64, b: u64) -> f64 {
    (b - a) as f64 / (a as f64 * b as f64)
}

fn is_prime_small(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p.is_multiple_of(2) {
        return p == 2;
    }
    let mut d = 3u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Exponent of the prime `p` in `n!`, i.e. `∑_k ⌊n/p^k⌋`.
pub fn legendre_vp(n: u64, p: u64) -> Result<u64, IdentityError> {
    if !is_prime_small(p) {
        return Err(IdentityError::NotPrime(p));
    }
    let mut total = 0;
    let mut q = n / p;
    while q > 0 {
        total += q;
        q /= p;
    }
    Ok(total)
}

/// Rebuilds `n!` as `∏_{p<=n} p^{v_p(n!)}` and compares it with the direct product.
pub fn legendre_reconstructs_factorial(n: u64) -> Result<bool, IdentityError> {
    let mut from_primes = BigUint::one();
    for p in Sieve::default().primes_up_to(n)? {
        let e = legendre_vp(n, p)?;
        let e = u32::try_from(e).map_err(|_| IdentityError::TooLarge {
            what: "legendre exponent",
            value: e,
            max: u32::MAX as u64,
        })?;
        from_primes *= BigUint::from(p).pow(e);
    }
    let direct: BigUint = (2..=n).map(BigUint::from).product();
    Ok(from_primes == direct)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorialReport {
    pub n: u64,
    /// `∑_{j<=n} ln j` against `∑_{p<=n} ln p · v_p(n!)`.
    pub verdict: IdentityVerdict,
    /// `(ln n! − n ln n) / n`.
    pub stirling_ratio: f64,
    pub stirling_ok: bool,
}

impl FactorialReport {
    pub fn pass(&self) -> bool {
        self.verdict.pass && self.stirling_ok
    }
}

/// Checks `ln n! = ∑_p ln p · v_p(n!)` and that `ln n! − n ln n` lies in `[−n, 0]`.
pub fn factorial_log_identity(n: u64) -> Result<FactorialReport, IdentityError> {
    factorial_log_identity_with(&Sieve::default(), n)
}

pub fn factorial_log_identity_with(
    sieve: &Sieve,
    n: u64,
) -> Result<FactorialReport, IdentityError> {
    if n < 1 {
        return Err(IdentityError::Domain {
            what: "factorial_log_identity",
            value: n as f64,
        });
    }
    sieve.check_bound(n)?;
    let lhs: CompensatedAccumulator = (2..=n).map(|j| (j as f64).ln()).collect();
    let mut rhs = CompensatedAccumulator::new();
    for p in sieve.primes_up_to(n)? {
        rhs.add((p as f64).ln() * legendre_vp(n, p)? as f64);
    }
    let lhs = lhs.value();
    let nf = n as f64;
    let stirling_ratio = (lhs - nf * nf.ln()) / nf;
    Ok(FactorialReport {
        n,
        verdict: IdentityVerdict::equality(lhs, rhs.value(), LOG_SUM_TOLERANCE),
        stirling_ratio,
        stirling_ok: (-1.0..=0.0).contains(&stirling_ratio),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerProductReport {
    pub n: u64,
    pub cutoff: u64,
    /// `∏_{p<=n} (1 − 1/p)^{-1}`, exact.
    pub product: BigRational,
    /// `∑ 1/j` over n-smooth `j <= cutoff`.
    pub partial_smooth_sum: f64,
    /// The same sum truncated at `cutoff / 2`.
    pub half_cutoff_sum: f64,
    pub bracket_ok: bool,
}

impl EulerProductReport {
    pub fn product_f64(&self) -> f64 {
        self.product.to_f64().unwrap_or(f64::NAN)
    }
}

/// Brackets the finite Euler product by partial sums over n-smooth numbers.
///
/// The partial sums must stay below the exact product and the gap must
/// shrink when the cutoff doubles from `cutoff / 2`.
pub fn euler_product_check(n: u64, cutoff: u64) -> Result<EulerProductReport, IdentityError> {
    if n < 2 {
        return Err(IdentityError::Domain {
            what: "euler_product_check",
            value: n as f64,
        });
    }
    if n > EULER_PRODUCT_MAX_N {
        return Err(IdentityError::TooLarge {
            what: "euler_product_check n",
            value: n,
            max: EULER_PRODUCT_MAX_N,
        });
    }
    if cutoff < n {
        return Err(IdentityError::Domain {
            what: "euler_product_check cutoff",
            value: cutoff as f64,
        });
    }
    if cutoff > EULER_PRODUCT_MAX_CUTOFF {
        return Err(IdentityError::TooLarge {
            what: "euler_product_check cutoff",
            value: cutoff,
            max: EULER_PRODUCT_MAX_CUTOFF,
        });
    }

    let primes: Vec<u64> = Sieve::default().primes_up_to(n)?.collect();
    let product = primes.iter().fold(BigRational::one(), |acc, &p| {
        acc * BigRational::new(BigInt::from(p), BigInt::from(p - 1))
    });

    let smooth = smooth_numbers(&primes, cutoff)?;
    let half = cutoff / 2;
    let split = smooth.partition_point(|&j| j <= half);
    // smallest terms first
    let half_cutoff_sum = smooth[..split]
        .iter()
        .rev()
        .map(|&j| 1.0 / j as f64)
        .collect::<CompensatedAccumulator>();
    let mut full = CompensatedAccumulator::new();
    for &j in smooth[split..].iter().rev() {
        full.add(1.0 / j as f64);
    }
    full.merge(&half_cutoff_sum);

    let product_f = product.to_f64().unwrap_or(f64::NAN);
    let partial_smooth_sum = full.value();
    let half_cutoff_sum = half_cutoff_sum.value();
    let bracket_ok = partial_smooth_sum < product_f
        && half_cutoff_sum <= partial_smooth_sum
        && (product_f - partial_smooth_sum) < (product_f - half_cutoff_sum);

    Ok(EulerProductReport {
        n,
        cutoff,
        product,
        partial_smooth_sum,
        half_cutoff_sum,
        bracket_ok,
    })
}

/// All integers `j <= cutoff` whose prime factors lie in `primes`, ascending.
///
/// Built by multiplying prime powers onto the smaller smooth numbers rather
/// than by factoring every integer up to the cutoff.
fn smooth_numbers(primes: &[u64], cutoff: u64) -> Result<Vec<u64>, IdentityError> {
    let mut out = vec![1u64];
    for &p in primes {
        let existing = out.len();
        for i in 0..existing {
            let mut v = out[i];
            while let Some(next) = v.checked_mul(p).filter(|&x| x <= cutoff) {
                out.push(next);
                v = next;
            }
            if out.len() > SMOOTH_ENUMERATION_LIMIT {
                return Err(IdentityError::TooLarge {
                    what: "smooth number count",
                    value: out.len() as u64,
                    max: SMOOTH_ENUMERATION_LIMIT as u64,
                });
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_bound_examples() {
        let v = log_one_minus_bound(0.0).unwrap();
        assert_eq!((v.lhs, v.rhs), (0.0, 0.0));
        assert!(v.pass);

        let v = log_one_minus_bound(0.5).unwrap();
        assert!((v.lhs - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(v.rhs, 0.75);
        assert!(v.pass);

        let v = log_one_minus_bound(0.25).unwrap();
        assert!((v.lhs - (4.0f64 / 3.0).ln()).abs() < 1e-15);
        assert_eq!(v.rhs, 0.3125);
        assert!(v.pass);
    }

    #[test]
    fn log_bound_domain() {
        assert!(log_one_minus_bound(-1e-9).is_err());
        assert!(log_one_minus_bound(0.5000001).is_err());
        assert!(log_one_minus_bound(f64::NAN).is_err());
    }

    #[test]
    fn abel_hand_example() {
        let seq =
            SequencePair::new(vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 2.0, 3.0, 4.0], 1, 3).unwrap();
        let v = abel_identity_eval(&seq).unwrap();
        assert_eq!(v.lhs, 6.0);
        assert_eq!(v.rhs, 6.0);
        assert!(v.pass);
    }

    #[test]
    fn abel_constant_f_telescopes() {
        let g = vec![0.3, -1.2, 4.5, 2.25, 7.0, -0.5];
        let f = vec![2.5; 6];
        let seq = SequencePair::new(f, g.clone(), 2, 5).unwrap();
        let v = abel_identity_eval(&seq).unwrap();
        let expect = 2.5 * (g[5] - g[1]);
        assert!((v.lhs - expect).abs() < 1e-14);
        assert!((v.rhs - expect).abs() < 1e-14);
    }

    #[test]
    fn abel_short_lists_are_index_errors() {
        let seq = SequencePair {
            f: vec![1.0; 3],
            g: vec![1.0; 4],
            m: 1,
            n: 3,
        };
        assert_eq!(
            abel_identity_eval(&seq),
            Err(IdentityError::Index { needed: 4, len: 3 })
        );
        assert!(SequencePair::new(vec![1.0; 5], vec![1.0; 5], 0, 2).is_err());
        assert!(SequencePair::new(vec![1.0; 5], vec![1.0; 5], 3, 2).is_err());
    }

    #[test]
    fn stieltjes_small_cases() {
        let v = stieltjes_identity_check(2).unwrap();
        assert_eq!(v.lhs, 0.5);
        assert_eq!(v.rhs, 0.5);

        let v = stieltjes_identity_check(3).unwrap();
        assert!((v.lhs - 5.0 / 6.0).abs() < 1e-15);
        assert!((v.rhs - 5.0 / 6.0).abs() < 1e-15);
        assert!(v.pass);

        // 4 is not prime: π(4)/4 + ∫_2^3 1/t² + 2∫_3^4 1/t² = 1/2 + 1/6 + 1/6
        let v = stieltjes_identity_check(4).unwrap();
        assert!((v.rhs - 5.0 / 6.0).abs() < 1e-15);
        assert!(stieltjes_identity_check(1).is_err());
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_vp(4, 2).unwrap(), 3);
        assert_eq!(legendre_vp(10, 5).unwrap(), 2);
        assert_eq!(legendre_vp(5, 7).unwrap(), 0);
        assert_eq!(legendre_vp(0, 2).unwrap(), 0);
        assert_eq!(legendre_vp(10, 4), Err(IdentityError::NotPrime(4)));
        assert_eq!(legendre_vp(10, 1), Err(IdentityError::NotPrime(1)));
    }

    #[test]
    fn factorial_small() {
        let r = factorial_log_identity(1).unwrap();
        assert_eq!(r.verdict.lhs, 0.0);
        assert_eq!(r.verdict.rhs, 0.0);
        assert_eq!(r.stirling_ratio, 0.0);
        assert!(r.pass());

        let r = factorial_log_identity(10).unwrap();
        assert!((r.verdict.lhs - 3_628_800f64.ln()).abs() < 1e-13);
        assert!(r.verdict.rel_diff <= 1e-10);
        assert!(r.pass());
        assert!(factorial_log_identity(0).is_err());
    }

    #[test]
    fn euler_product_powers_of_two() {
        let r = euler_product_check(2, 1 << 20).unwrap();
        assert_eq!(r.product, BigRational::from_integer(BigInt::from(2)));
        assert_eq!(r.partial_smooth_sum, 2.0 - 2f64.powi(-20));
        assert!(r.bracket_ok);
    }

    #[test]
    fn euler_product_seven() {
        let r = euler_product_check(7, 1_000_000).unwrap();
        assert_eq!(
            r.product,
            BigRational::new(BigInt::from(35), BigInt::from(8))
        );
        assert!(r.partial_smooth_sum < 4.375);
        assert!(4.375 - r.partial_smooth_sum < 0.05);
        assert!(r.bracket_ok);
    }

    #[test]
    fn euler_product_limits() {
        assert!(euler_product_check(51, 1000).is_err());
        assert!(euler_product_check(1, 1000).is_err());
        assert!(euler_product_check(10, 5).is_err());
    }

    #[test]
    fn smooth_enumeration_matches_factoring() {
        let primes = [2, 3, 5];
        let got = smooth_numbers(&primes, 200).unwrap();
        let want: Vec<u64> = (1..=200u64)
            .filter(|&j| {
                let mut v = j;
                for p in primes {
                    while v % p == 0 {
                        v /= p;
                    }
                }
                v == 1
            })
            .collect();
        assert_eq!(got, want);
    }
}
