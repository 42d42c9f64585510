//! Inequalities and envelopes around the prime harmonic sum, checked on
//! finite ranges against exact sieve counts.

use std::f64::consts::LN_10;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use thiserror::Error;

use crate::sieve::{validate_points, Sieve, SieveError};
use crate::sums::{accumulate_checkpoints, CheckpointRow};

/// Constants quoted alongside the ln ln n estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MertensConstants {
    pub b: f64,
    pub euler_slack: f64,
    pub rs_min_n: u64,
}

impl MertensConstants {
    pub const B: f64 = 0.261497212847643;
    pub const EULER_SLACK: f64 = 0.48;
    pub const RS_MIN_N: u64 = 286;

    pub const VALUES: MertensConstants = MertensConstants {
        b: Self::B,
        euler_slack: Self::EULER_SLACK,
        rs_min_n: Self::RS_MIN_N,
    };
}

/// Cap on `|A(x) − ln x|`.
pub const RESIDUAL_CAP: f64 = 2.0;
/// Cap on `∑ 1/p²`; the full sum over all integers is π²/6 ≈ 1.6449.
pub const Q_CAP: f64 = 1.645;
/// Cap on `∑ ln p / (p² − p)`.
pub const L_CAP: f64 = 2.0;
/// Largest `n` for the big-integer binomial chain.
pub const BINOMIAL_MAX_N: u64 = 5000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("{what}: {value} is outside the domain")]
    Domain { what: &'static str, value: f64 },
    #[error("{what}: {value} exceeds the supported maximum {max}")]
    TooLarge {
        what: &'static str,
        value: u64,
        max: u64,
    },
    #[error(transparent)]
    Sieve(#[from] SieveError),
}

/// Verdict of one inequality `lhs <= rhs` over a scan.
///
/// `worst_margin` is the smallest `rhs − lhs` seen; ties go to the lowest
/// argument so the report does not depend on scan order.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub name: String,
    pub range: (u64, u64),
    pub scanned: u64,
    pub violations: u64,
    pub worst_margin: f64,
    pub worst_arg: u64,
}

impl BoundReport {
    pub fn new(name: impl Into<String>, lo: u64, hi: u64) -> Self {
        Self {
            name: name.into(),
            range: (lo, hi),
            scanned: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            worst_arg: lo,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// Records one evaluation with signed margin `rhs − lhs`.
    pub fn record(&mut self, arg: u64, margin: f64) {
        if self.scanned == 0 || self.is_worse(arg, margin) {
            self.worst_margin = margin;
            self.worst_arg = arg;
        }
        self.scanned += 1;
        if margin < 0.0 || margin.is_nan() {
            self.violations += 1;
        }
    }

    pub fn merge(mut self, other: BoundReport) -> Self {
        if other.scanned > 0
            && (self.scanned == 0 || self.is_worse(other.worst_arg, other.worst_margin))
        {
            self.worst_margin = other.worst_margin;
            self.worst_arg = other.worst_arg;
        }
        self.scanned += other.scanned;
        self.violations += other.violations;
        self
    }

    // NaN counts as the worst possible margin.
    fn is_worse(&self, arg: u64, margin: f64) -> bool {
        match (margin.is_nan(), self.worst_margin.is_nan()) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => arg < self.worst_arg,
            (false, false) => {
                margin < self.worst_margin || (margin == self.worst_margin && arg < self.worst_arg)
            }
        }
    }
}

fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().expect("fits in 64 bits") as f64).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("fits in 64 bits") as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Log-scale margin `ln rhs − ln lhs` whose sign always follows the exact comparison.
fn exact_log_margin(lhs: &BigUint, rhs: &BigUint) -> f64 {
    let margin = ln_big(rhs) - ln_big(lhs);
    if lhs > rhs {
        margin.min(-f64::EPSILON)
    } else {
        margin.max(0.0)
    }
}

/// The three quantities of the binomial chain at one `n`.
struct BinomialChain {
    n: u64,
    /// n^{π(2n) − π(n)}
    power: BigUint,
    /// ∏_{n<p<=2n} p
    prime_product: BigUint,
    /// C(2n, n)
    binomial: BigUint,
    /// 4^n
    four_pow: BigUint,
}

impl BinomialChain {
    fn margin(&self) -> f64 {
        exact_log_margin(&self.power, &self.prime_product)
            .min(exact_log_margin(&self.prime_product, &self.binomial))
            .min(exact_log_margin(&self.binomial, &self.four_pow))
    }
}

fn check_binomial_range(lo: u64, hi: u64) -> Result<(), BoundsError> {
    if lo < 1 || lo > hi {
        return Err(BoundsError::Domain {
            what: "binomial_prime_product_check",
            value: lo as f64,
        });
    }
    if hi > BINOMIAL_MAX_N {
        return Err(BoundsError::TooLarge {
            what: "binomial_prime_product_check",
            value: hi,
            max: BINOMIAL_MAX_N,
        });
    }
    Ok(())
}

/// `n^{π(2n)−π(n)} <= ∏_{n<p<=2n} p <= C(2n, n) <= 4^n` in exact arithmetic.
pub fn binomial_prime_product_check(n: u64) -> Result<BoundReport, BoundsError> {
    binomial_prime_product_range(n, n)
}

/// The binomial chain for every `n` in `[lo, hi]`, updated incrementally.
pub fn binomial_prime_product_range(lo: u64, hi: u64) -> Result<BoundReport, BoundsError> {
    check_binomial_range(lo, hi)?;
    let primes = Sieve::default().primes_vec(2 * hi)?;
    let mut report = BoundReport::new("binomial_prime_product", lo, hi);

    let mut binomial = binomial_coefficient(2 * lo, lo);
    let mut four_pow = BigUint::from(4u32).pow(lo as u32);
    for n in lo..=hi {
        if n > lo {
            // C(2n, n) = C(2n−2, n−1) · (2n−1)(2n) / n²
            binomial = binomial * BigUint::from((2 * n - 1) * (2 * n)) / BigUint::from(n * n);
            four_pow <<= 2;
        }
        let window =
            &primes[primes.partition_point(|&p| p <= n)..primes.partition_point(|&p| p <= 2 * n)];
        let prime_product: BigUint = window.iter().map(|&p| BigUint::from(p)).product();
        let chain = BinomialChain {
            n,
            power: BigUint::from(n).pow(window.len() as u32),
            prime_product,
            binomial: binomial.clone(),
            four_pow: four_pow.clone(),
        };
        report.record(chain.n, chain.margin());
    }
    Ok(report)
}

fn binomial_coefficient(n: u64, k: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// `π` over an ascending prime list.
#[derive(Debug, Clone)]
pub struct PiTable {
    primes: Vec<u64>,
}

impl PiTable {
    pub fn new(primes: Vec<u64>) -> Self {
        Self { primes }
    }

    pub fn from_sieve(sieve: &Sieve, n: u64) -> Result<Self, SieveError> {
        Ok(Self::new(sieve.primes_vec(n)?))
    }

    pub fn pi(&self, x: u64) -> u64 {
        self.primes.partition_point(|&p| p <= x) as u64
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }
}

/// Dyadic Chebyshev bound on `[lo, hi]`.
///
/// For every integer `y` checks `π(y) − π(y/2) <= 4 (y/ln y − (y/2)/ln(y/2))`
/// and for every integer `x` checks `π(x) − π(16) <= 4 x / ln x`.
pub fn chebyshev_dyadic_check(sieve: &Sieve, lo: u64, hi: u64) -> Result<BoundReport, BoundsError> {
    if lo > hi {
        return Err(BoundsError::Domain {
            what: "chebyshev_dyadic_check",
            value: lo as f64,
        });
    }
    let points: Vec<u64> = (lo..=hi).collect();
    chebyshev_dyadic_points(sieve, &points)
}

/// The dyadic Chebyshev bound at an ascending list of points, all `>= 16`.
pub fn chebyshev_dyadic_points(sieve: &Sieve, points: &[u64]) -> Result<BoundReport, BoundsError> {
    require_min(points, 16, "chebyshev_dyadic_check")?;
    let (lo, hi) = (points[0], *points.last().expect("validated non-empty"));
    let table = PiTable::from_sieve(sieve, hi)?;
    let pi16 = table.pi(16);
    let name = "chebyshev_dyadic";
    let report = points
        .par_iter()
        .fold(
            || BoundReport::new(name, lo, hi),
            |mut rep, &y| {
                let yf = y as f64;
                let half = yf / 2.0;
                let pi_y = table.pi(y);
                let dyadic_lhs = (pi_y - table.pi(y / 2)) as f64;
                let dyadic_rhs = 4.0 * (yf / yf.ln() - half / half.ln());
                let total_lhs = (pi_y - pi16) as f64;
                let total_rhs = 4.0 * yf / yf.ln();
                rep.record(y, (dyadic_rhs - dyadic_lhs).min(total_rhs - total_lhs));
                rep
            },
        )
        .reduce(|| BoundReport::new(name, lo, hi), BoundReport::merge);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSample {
    pub x: u64,
    /// `A(x) − ln x`.
    pub r: f64,
}

/// `r(x) = ∑_{p<=x} ln p / p − ln x` at each point.
pub fn mertens_residual_scan(
    sieve: &Sieve,
    points: &[u64],
) -> Result<Vec<ResidualSample>, BoundsError> {
    require_min(points, 2, "mertens_residual_scan")?;
    let rows = rows_at(sieve, points)?;
    Ok(rows
        .iter()
        .map(|row| ResidualSample {
            x: row.x,
            r: row.mertens_residual(),
        })
        .collect())
}

/// `|r(x)| <= cap` over the samples.
pub fn residual_cap_report(samples: &[ResidualSample], cap: f64) -> BoundReport {
    let lo = samples.first().map_or(0, |s| s.x);
    let hi = samples.last().map_or(0, |s| s.x);
    let mut rep = BoundReport::new("mertens_residual_cap", lo, hi);
    for s in samples {
        rep.record(s.x, cap - s.r.abs());
    }
    rep
}

/// Smallest and largest residual among the samples.
pub fn residual_band(samples: &[ResidualSample]) -> (f64, f64) {
    samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.r), hi.max(s.r))
        })
}

/// Cap report for one column of the checkpoint rows.
pub fn row_cap_report(
    name: &str,
    rows: &[CheckpointRow],
    value: impl Fn(&CheckpointRow) -> f64,
    cap: f64,
) -> BoundReport {
    let lo = rows.first().map_or(0, |r| r.x);
    let hi = rows.last().map_or(0, |r| r.x);
    let mut rep = BoundReport::new(name, lo, hi);
    for row in rows {
        rep.record(row.x, cap - value(row));
    }
    rep
}

/// Both forms of the Euler lower bound.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerLowerBound {
    /// `ln ln n <= S(n) + Q(n)`
    pub chain: BoundReport,
    /// `S(n) >= ln ln n − 0.48`
    pub slack: BoundReport,
}

impl EulerLowerBound {
    pub fn passed(&self) -> bool {
        self.chain.passed() && self.slack.passed()
    }
}

pub fn euler_lower_bound_check(
    sieve: &Sieve,
    points: &[u64],
) -> Result<EulerLowerBound, BoundsError> {
    require_min(points, 2, "euler_lower_bound_check")?;
    let rows = rows_at(sieve, points)?;
    Ok(euler_lower_bound_rows(&rows))
}

/// Euler lower bound over already accumulated rows.
pub fn euler_lower_bound_rows(rows: &[CheckpointRow]) -> EulerLowerBound {
    let lo = rows.first().map_or(0, |r| r.x);
    let hi = rows.last().map_or(0, |r| r.x);
    let mut chain = BoundReport::new("euler_lower_bound_chain", lo, hi);
    let mut slack = BoundReport::new("euler_lower_bound_slack", lo, hi);
    for row in rows {
        let lnln = (row.x as f64).ln().ln();
        chain.record(row.x, row.s + row.q - lnln);
        slack.record(row.x, row.s - (lnln - MertensConstants::EULER_SLACK));
    }
    EulerLowerBound { chain, slack }
}

/// The two readings of the Rosser–Schoenfeld envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct RosserSchoenfeld {
    /// Lower correction `1/(2 (ln n)²)`, upper correction `1/(2 ln n)²`.
    pub printed: BoundReport,
    /// `1/(2 (ln n)²)` on both sides.
    pub symmetric: BoundReport,
}

impl RosserSchoenfeld {
    pub fn passed(&self) -> bool {
        self.printed.passed() && self.symmetric.passed()
    }
}

pub fn rosser_schoenfeld_check(
    sieve: &Sieve,
    points: &[u64],
) -> Result<RosserSchoenfeld, BoundsError> {
    require_min(
        points,
        MertensConstants::RS_MIN_N,
        "rosser_schoenfeld_check",
    )?;
    let rows = rows_at(sieve, points)?;
    rosser_schoenfeld_rows(&rows)
}

/// Envelope margins for one row: `(printed, symmetric)`.
pub fn rosser_schoenfeld_margins(row: &CheckpointRow) -> (f64, f64) {
    let ln = (row.x as f64).ln();
    let centre = ln.ln() + MertensConstants::B;
    let wide = 1.0 / (2.0 * ln * ln);
    let narrow = 1.0 / ((2.0 * ln) * (2.0 * ln));
    let lower = row.s - (centre - wide);
    let printed = lower.min(centre + narrow - row.s);
    let symmetric = lower.min(centre + wide - row.s);
    (printed, symmetric)
}

pub fn rosser_schoenfeld_rows(rows: &[CheckpointRow]) -> Result<RosserSchoenfeld, BoundsError> {
    if let Some(row) = rows.iter().find(|r| r.x < MertensConstants::RS_MIN_N) {
        return Err(BoundsError::Domain {
            what: "rosser_schoenfeld_check",
            value: row.x as f64,
        });
    }
    let lo = rows.first().map_or(0, |r| r.x);
    let hi = rows.last().map_or(0, |r| r.x);
    let mut printed = BoundReport::new("rosser_schoenfeld_printed", lo, hi);
    let mut symmetric = BoundReport::new("rosser_schoenfeld_symmetric", lo, hi);
    for row in rows {
        let (p, s) = rosser_schoenfeld_margins(row);
        printed.record(row.x, p);
        symmetric.record(row.x, s);
    }
    Ok(RosserSchoenfeld { printed, symmetric })
}

/// `S(x) − ln ln x` as an estimate of B.
pub fn estimate_mertens_b(sieve: &Sieve, x: u64) -> Result<f64, BoundsError> {
    if x < MertensConstants::RS_MIN_N {
        return Err(BoundsError::Domain {
            what: "estimate_mertens_b",
            value: x as f64,
        });
    }
    Ok(rows_at(sieve, &[x])?[0].s_minus_lnln())
}

/// Half-width of the symmetric envelope at `x`: `1/(2 (ln x)²)`.
pub fn envelope_half_width(x: f64) -> f64 {
    let ln = x.ln();
    1.0 / (2.0 * ln * ln)
}

/// A threshold given by its decimal logarithm, too large to sieve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtrapolationQuery {
    log10_x: f64,
}

impl ExtrapolationQuery {
    /// Accepts `log10_x > 1/ln 10`, i.e. `ln x > 1`, so that `ln ln x > 0`.
    pub fn new(log10_x: f64) -> Result<Self, BoundsError> {
        if !log10_x.is_finite() || log10_x <= 1.0 / LN_10 {
            return Err(BoundsError::Domain {
                what: "extrapolate_sum",
                value: log10_x,
            });
        }
        Ok(Self { log10_x })
    }

    pub fn log10_x(&self) -> f64 {
        self.log10_x
    }
}

/// `ln ln x + B` evaluated as `ln(log10 x · ln 10) + B`, without forming `x`.
pub fn extrapolate_sum(q: ExtrapolationQuery) -> f64 {
    (q.log10_x * LN_10).ln() + MertensConstants::B
}

/// Roughly `per_decade` points per power of ten in `[lo, hi]`, always
/// including both ends.
pub fn log_grid(lo: u64, hi: u64, per_decade: u32) -> Vec<u64> {
    if lo > hi {
        return Vec::new();
    }
    let mut out = vec![lo];
    let step = 1.0 / per_decade as f64;
    let first = ((lo.max(1) as f64).log10() * per_decade as f64).floor() as i64;
    let last = ((hi as f64).log10() * per_decade as f64).ceil() as i64;
    for k in first..=last {
        let v = 10f64.powf(k as f64 * step).round();
        if v >= lo as f64 && v <= hi as f64 {
            out.push(v as u64);
        }
    }
    out.push(hi);
    out.sort_unstable();
    out.dedup();
    out
}

/// Every integer in `[lo, min(hi, dense_until)]`, then `per_decade`
/// log-spaced points up to `hi`.
pub fn dense_then_log(lo: u64, hi: u64, dense_until: u64, per_decade: u32) -> Vec<u64> {
    let dense_end = hi.min(dense_until);
    let mut out: Vec<u64> = (lo..=dense_end).collect();
    if hi > dense_end {
        out.extend(log_grid(dense_end + 1, hi, per_decade));
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn require_min(points: &[u64], min: u64, what: &'static str) -> Result<(), BoundsError> {
    validate_points(points)?;
    if points[0] < min {
        return Err(BoundsError::Domain {
            what,
            value: points[0] as f64,
        });
    }
    Ok(())
}

fn rows_at(sieve: &Sieve, points: &[u64]) -> Result<Vec<CheckpointRow>, BoundsError> {
    let last = *points.last().expect("validated non-empty");
    Ok(accumulate_checkpoints(sieve, last, points)?)
}
