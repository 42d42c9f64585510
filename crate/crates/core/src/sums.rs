//! Compensated prime sums sampled at checkpoints.

use crate::sieve::{validate_points, Sieve, SieveError};

/// binary64 unit roundoff, 2^-53.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Kahan–Babuška–Neumaier running sum.
///
/// The compensation term collects the low-order bits lost by each addition,
/// so the error stays near one rounding of the final result instead of
/// growing with the number of terms.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedAccumulator {
    sum: f64,
    compensation: f64,
}

impl CompensatedAccumulator {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            compensation: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another accumulator in, keeping both compensation terms.
    pub fn merge(&mut self, other: &CompensatedAccumulator) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    pub fn raw_sum(&self) -> f64 {
        self.sum
    }

    pub fn compensation(&self) -> f64 {
        self.compensation
    }
}

impl std::ops::AddAssign<f64> for CompensatedAccumulator {
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl FromIterator<f64> for CompensatedAccumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        iter.into_iter().for_each(|v| acc.add(v));
        acc
    }
}

/// Compensated sum of an iterator of terms.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    terms
        .into_iter()
        .collect::<CompensatedAccumulator>()
        .value()
}

/// Per-prime contributions to the four sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimeTerms {
    pub recip: f64,
    pub log_over_p: f64,
    pub recip_sq: f64,
    pub log_over_p_sq_minus_p: f64,
}

impl PrimeTerms {
    pub fn of(p: u64) -> Self {
        let pf = p as f64;
        let ln_p = pf.ln();
        Self {
            recip: 1.0 / pf,
            log_over_p: ln_p / pf,
            recip_sq: 1.0 / (pf * pf),
            log_over_p_sq_minus_p: ln_p / (pf * (pf - 1.0)),
        }
    }
}

/// The four running sums over primes, in the order the primes were added.
#[derive(Debug, Clone, Copy, Default)]
pub struct PrimeSums {
    count: u64,
    s: CompensatedAccumulator,
    a: CompensatedAccumulator,
    q: CompensatedAccumulator,
    l: CompensatedAccumulator,
}

impl PrimeSums {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_terms(&mut self, t: &PrimeTerms) {
        self.count += 1;
        self.s.add(t.recip);
        self.a.add(t.log_over_p);
        self.q.add(t.recip_sq);
        self.l.add(t.log_over_p_sq_minus_p);
    }

    pub fn add_prime(&mut self, p: u64) {
        self.add_terms(&PrimeTerms::of(p));
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn row(&self, x: u64) -> CheckpointRow {
        CheckpointRow {
            x,
            pi_x: self.count,
            s: self.s.value(),
            a: self.a.value(),
            q: self.q.value(),
            l: self.l.value(),
        }
    }
}

/// Sums over the primes `p <= x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointRow {
    pub x: u64,
    pub pi_x: u64,
    /// ∑ 1/p
    pub s: f64,
    /// ∑ ln p / p
    pub a: f64,
    /// ∑ 1/p²
    pub q: f64,
    /// ∑ ln p / (p² − p)
    pub l: f64,
}

impl CheckpointRow {
    /// `S(x) − ln ln x`; the Mertens constant estimate at this point.
    pub fn s_minus_lnln(&self) -> f64 {
        self.s - (self.x as f64).ln().ln()
    }

    /// `A(x) − ln x`.
    pub fn mertens_residual(&self) -> f64 {
        self.a - (self.x as f64).ln()
    }
}

/// Computes the four sums at each checkpoint in one sieve pass.
///
/// Terms are evaluated on the sieve workers; the summation itself always
/// runs prime by prime in ascending order, so the rows are bit-identical for
/// any worker count or segment size.
pub fn accumulate_checkpoints(
    sieve: &Sieve,
    n_max: u64,
    points: &[u64],
) -> Result<Vec<CheckpointRow>, SieveError> {
    validate_points(points)?;
    sieve.check_bound(n_max)?;
    let last = *points.last().expect("validated non-empty");
    if last > n_max {
        return Err(SieveError::PointBeyondLimit {
            point: last,
            limit: n_max,
        });
    }

    let mut rows = Vec::with_capacity(points.len());
    let mut sums = PrimeSums::new();
    let mut next = 0usize;
    sieve.for_each_segment(
        last,
        |primes| {
            primes
                .iter()
                .map(|&p| (p, PrimeTerms::of(p)))
                .collect::<Vec<_>>()
        },
        |chunk| {
            for (p, terms) in chunk {
                while next < points.len() && points[next] < p {
                    rows.push(sums.row(points[next]));
                    next += 1;
                }
                sums.add_terms(&terms);
            }
        },
    )?;
    rows.extend(points[next..].iter().map(|&x| sums.row(x)));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let mut acc = CompensatedAccumulator::new();
        for v in [1e200, 0.1, 0.2, 0.3, -1e200] {
            acc += v;
        }
        assert!((acc.value() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn merge_matches_sequential_on_simple_input() {
        let mut left: CompensatedAccumulator = (1..=500).map(|i| 1.0 / i as f64).collect();
        let right: CompensatedAccumulator = (501..=1000).map(|i| 1.0 / i as f64).collect();
        left.merge(&right);
        let seq = compensated_sum((1..=1000).map(|i| 1.0 / i as f64));
        assert!((left.value() - seq).abs() <= 2.0 * UNIT_ROUNDOFF * seq);
    }

    #[test]
    fn single_prime_two() {
        let rows = accumulate_checkpoints(&Sieve::default(), 10, &[2]).unwrap();
        let r = rows[0];
        assert_eq!(r.pi_x, 1);
        assert_eq!(r.s, 0.5);
        assert_eq!(r.a, 2f64.ln() / 2.0);
        assert_eq!(r.q, 0.25);
        assert_eq!(r.l, 2f64.ln() / 2.0);
    }

    #[test]
    fn ten_matches_table() {
        let rows = accumulate_checkpoints(&Sieve::default(), 10, &[1, 10]).unwrap();
        assert_eq!(rows[0].pi_x, 0);
        assert_eq!(rows[0].s, 0.0);
        assert_eq!(rows[1].pi_x, 4);
        let exact = 1.0 / 2.0 + 1.0 / 3.0 + 1.0 / 5.0 + 1.0 / 7.0;
        assert!((rows[1].s - exact).abs() < 1e-15);
        assert!((rows[1].s - 1.176).abs() <= 0.0005);
    }

    #[test]
    fn sums_constant_between_primes() {
        let rows = accumulate_checkpoints(&Sieve::default(), 30, &[23, 24, 28, 29]).unwrap();
        assert_eq!(rows[0].s, rows[1].s);
        assert_eq!(rows[1].a, rows[2].a);
        assert!(rows[3].s > rows[2].s);
        assert!(rows[3].l > rows[2].l);
    }

    #[test]
    fn last_point_above_n_max_is_rejected() {
        assert!(accumulate_checkpoints(&Sieve::default(), 10, &[5, 11]).is_err());
        assert!(accumulate_checkpoints(&Sieve::default(), 10, &[]).is_err());
    }
}
