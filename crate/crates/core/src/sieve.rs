//! Segmented sieve of Eratosthenes over odd integers.
//!
//! The range `[0, n]` is cut into fixed windows of `segment_size` integers.
//! Each window stores one flag per odd integer, so a default window of 2^18
//! integers needs 128 KiB of flags. Windows can be sieved by several workers,
//! but results are always handed to the consumer in ascending window order,
//! which makes every downstream reduction independent of the worker count.

use rayon::prelude::*;
use thiserror::Error;

/// Integers per segment when nothing else is configured.
pub const DEFAULT_SEGMENT_SIZE: usize = 1 << 18;

/// Largest sieve bound accepted unless the configuration raises it.
pub const DEFAULT_MAX_BOUND: u64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SieveError {
    #[error("sieve bound {requested} exceeds the configured maximum {max}")]
    BoundTooLarge { requested: u64, max: u64 },
    #[error("checkpoint list is empty")]
    EmptyPoints,
    #[error("checkpoints must be strictly ascending ({prev} is followed by {next})")]
    Unsorted { prev: u64, next: u64 },
    #[error("checkpoint {point} lies above the requested limit {limit}")]
    PointBeyondLimit { point: u64, limit: u64 },
    #[error("segment size must be at least 2 integers, got {0}")]
    InvalidSegmentSize(usize),
    #[error("worker count must be positive")]
    NoWorkers,
    #[error("could not start worker pool: {0}")]
    ThreadPool(String),
}

impl SieveError {
    /// True when the error comes from the size cap rather than bad input.
    pub fn is_resource_limit(&self) -> bool {
        matches!(
            self,
            SieveError::BoundTooLarge { .. } | SieveError::ThreadPool(_)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveConfig {
    /// Integers covered by one segment. Odd values are rounded up to even.
    pub segment_size: usize,
    pub workers: usize,
    pub max_bound: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            segment_size: DEFAULT_SEGMENT_SIZE,
            workers: 1,
            max_bound: DEFAULT_MAX_BOUND,
        }
    }
}

impl SieveConfig {
    pub fn with_segment_size(mut self, segment_size: usize) -> Self {
        self.segment_size = segment_size;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_max_bound(mut self, max_bound: u64) -> Self {
        self.max_bound = max_bound;
        self
    }
}

/// `π(x)` at one requested point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PiCheckpoint {
    pub x: u64,
    pub pi_x: u64,
}

/// Rejects empty or non strictly ascending checkpoint lists.
pub fn validate_points(points: &[u64]) -> Result<(), SieveError> {
    if points.is_empty() {
        return Err(SieveError::EmptyPoints);
    }
    for w in points.windows(2) {
        if w[0] >= w[1] {
            return Err(SieveError::Unsorted {
                prev: w[0],
                next: w[1],
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Default)]
pub struct Sieve {
    config: SieveConfig,
}

impl Sieve {
    pub fn new(config: SieveConfig) -> Result<Self, SieveError> {
        if config.segment_size < 2 {
            return Err(SieveError::InvalidSegmentSize(config.segment_size));
        }
        if config.workers == 0 {
            return Err(SieveError::NoWorkers);
        }
        Ok(Self { config })
    }

    pub fn config(&self) -> &SieveConfig {
        &self.config
    }

    pub fn check_bound(&self, n: u64) -> Result<(), SieveError> {
        if n > self.config.max_bound {
            return Err(SieveError::BoundTooLarge {
                requested: n,
                max: self.config.max_bound,
            });
        }
        Ok(())
    }

    /// Lazily streams the primes `p <= n` in increasing order.
    pub fn primes_up_to(&self, n: u64) -> Result<PrimeStream, SieveError> {
        self.check_bound(n)?;
        Ok(PrimeStream::new(SegmentLayout::new(
            n,
            self.config.segment_size,
        )))
    }

    /// Collects every prime `p <= n`, sieving segments on the configured workers.
    pub fn primes_vec(&self, n: u64) -> Result<Vec<u64>, SieveError> {
        let mut all = Vec::new();
        self.for_each_segment(n, |primes| primes.to_vec(), |chunk| all.extend(chunk))?;
        Ok(all)
    }

    /// Prime counts at each requested point from one pass up to the last point.
    pub fn pi_at(&self, points: &[u64]) -> Result<Vec<PiCheckpoint>, SieveError> {
        validate_points(points)?;
        let n = *points.last().expect("validated non-empty");
        let mut out = Vec::with_capacity(points.len());
        let mut next = 0usize;
        let mut count = 0u64;
        self.for_each_segment(
            n,
            |primes| primes.to_vec(),
            |chunk| {
                for p in chunk {
                    while next < points.len() && points[next] < p {
                        out.push(PiCheckpoint {
                            x: points[next],
                            pi_x: count,
                        });
                        next += 1;
                    }
                    count += 1;
                }
            },
        )?;
        for &x in &points[next..] {
            out.push(PiCheckpoint { x, pi_x: count });
        }
        Ok(out)
    }

    /// Sieves `[0, n]` segment by segment.
    ///
    /// `map` sees the ascending primes of one segment and may run on any
    /// worker; `consume` receives the mapped values strictly in segment order.
    pub fn for_each_segment<T, M, C>(
        &self,
        n: u64,
        map: M,
        mut consume: C,
    ) -> Result<(), SieveError>
    where
        T: Send,
        M: Fn(&[u64]) -> T + Sync,
        C: FnMut(T),
    {
        self.check_bound(n)?;
        let layout = SegmentLayout::new(n, self.config.segment_size);
        let total = layout.segment_count();

        if self.config.workers == 1 {
            let mut flags = Vec::new();
            let mut primes = Vec::new();
            for s in 0..total {
                layout.sieve_segment(s, &mut flags, &mut primes);
                consume(map(&primes));
            }
            return Ok(());
        }

        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.workers)
            .build()
            .map_err(|e| SieveError::ThreadPool(e.to_string()))?;
        let batch = (self.config.workers as u64) * 4;
        let mut start = 0u64;
        while start < total {
            let end = (start + batch).min(total);
            let mapped: Vec<T> = pool.install(|| {
                (start..end)
                    .into_par_iter()
                    .map_init(
                        || (Vec::new(), Vec::new()),
                        |(flags, primes), s| {
                            layout.sieve_segment(s, flags, primes);
                            map(primes)
                        },
                    )
                    .collect()
            });
            mapped.into_iter().for_each(&mut consume);
            start = end;
        }
        Ok(())
    }
}

/// Streams primes with the default configuration.
pub fn primes_up_to(n: u64) -> Result<PrimeStream, SieveError> {
    Sieve::default().primes_up_to(n)
}

/// `π` at each point with the default configuration.
pub fn pi_at(points: &[u64]) -> Result<Vec<PiCheckpoint>, SieveError> {
    Sieve::default().pi_at(points)
}

/// Geometry of a sieve run: the bound, the window width and the odd base primes.
#[derive(Debug, Clone)]
struct SegmentLayout {
    n: u64,
    width: u64,
    base: Vec<u64>,
}

impl SegmentLayout {
    fn new(n: u64, segment_size: usize) -> Self {
        let width = (segment_size as u64 + 1) & !1;
        Self {
            n,
            width,
            base: odd_primes_up_to(n.isqrt()),
        }
    }

    fn segment_count(&self) -> u64 {
        if self.n < 2 {
            0
        } else {
            self.n / self.width + 1
        }
    }

    /// Writes the primes of segment `s` into `primes`, ascending.
    fn sieve_segment(&self, s: u64, flags: &mut Vec<bool>, primes: &mut Vec<u64>) {
        primes.clear();
        let lo = s * self.width;
        if lo >= self.n {
            return;
        }
        // slot i holds the odd value lo + 2i + 1
        let slots = ((self.n - lo - 1) / 2 + 1).min(self.width / 2) as usize;
        flags.clear();
        flags.resize(slots, true);
        let hi = lo + 2 * slots as u64 - 1;

        for &p in &self.base {
            let sq = p * p;
            if sq > hi {
                break;
            }
            let mut m = (lo + 1).div_ceil(p) * p;
            if m % 2 == 0 {
                m += p;
            }
            let mut i = ((m.max(sq) - lo - 1) / 2) as usize;
            let step = p as usize;
            while i < slots {
                flags[i] = false;
                i += step;
            }
        }

        if s == 0 {
            flags[0] = false;
            primes.push(2);
        }
        primes.extend(
            flags
                .iter()
                .enumerate()
                .filter(|(_, &f)| f)
                .map(|(i, _)| lo + 2 * i as u64 + 1),
        );
    }
}

/// Odd primes up to `limit` by a plain sieve; used for the base primes.
fn odd_primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 3 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit / 2 + 1];
    let mut out = Vec::new();
    let mut v = 3;
    while v <= limit {
        if !composite[v / 2] {
            out.push(v as u64);
            let mut m = v * v;
            while m <= limit {
                composite[m / 2] = true;
                m += 2 * v;
            }
        }
        v += 2;
    }
    out
}

/// Iterator over all primes up to a bound, sieving one segment at a time.
#[derive(Debug, Clone)]
pub struct PrimeStream {
    layout: SegmentLayout,
    next_segment: u64,
    flags: Vec<bool>,
    pending: Vec<u64>,
    pos: usize,
}

impl PrimeStream {
    fn new(layout: SegmentLayout) -> Self {
        Self {
            layout,
            next_segment: 0,
            flags: Vec::new(),
            pending: Vec::new(),
            pos: 0,
        }
    }

    pub fn upper_bound(&self) -> u64 {
        self.layout.n
    }

    pub fn segment_size(&self) -> u64 {
        self.layout.width
    }
}

impl Iterator for PrimeStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        while self.pos >= self.pending.len() {
            if self.next_segment >= self.layout.segment_count() {
                return None;
            }
            self.layout
                .sieve_segment(self.next_segment, &mut self.flags, &mut self.pending);
            self.next_segment += 1;
            self.pos = 0;
        }
        let p = self.pending[self.pos];
        self.pos += 1;
        Some(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_prime_trial(n: u64) -> bool {
        n >= 2
            && (2..)
                .take_while(|d| d * d <= n)
                .all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn tiny_bounds() {
        assert_eq!(primes_up_to(0).unwrap().count(), 0);
        assert_eq!(primes_up_to(1).unwrap().count(), 0);
        assert_eq!(primes_up_to(2).unwrap().collect::<Vec<_>>(), vec![2]);
        assert_eq!(primes_up_to(3).unwrap().collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(
            primes_up_to(10).unwrap().collect::<Vec<_>>(),
            vec![2, 3, 5, 7]
        );
    }

    #[test]
    fn hundred_matches_trial_division() {
        let got: Vec<u64> = primes_up_to(100).unwrap().collect();
        let want: Vec<u64> = (0..=100).filter(|&n| is_prime_trial(n)).collect();
        assert_eq!(got.len(), 25);
        assert_eq!(got.last(), Some(&97));
        assert_eq!(got, want);
    }

    #[test]
    fn small_segments_cross_boundaries() {
        for seg in [2usize, 3, 4, 6, 10, 16, 30] {
            let sieve = Sieve::new(SieveConfig::default().with_segment_size(seg)).unwrap();
            let got: Vec<u64> = sieve.primes_up_to(500).unwrap().collect();
            let want: Vec<u64> = (0..=500).filter(|&n| is_prime_trial(n)).collect();
            assert_eq!(got, want, "segment size {seg}");
        }
    }

    #[test]
    fn pi_at_examples() {
        assert_eq!(pi_at(&[1]).unwrap(), vec![PiCheckpoint { x: 1, pi_x: 0 }]);
        assert_eq!(
            pi_at(&[10, 100]).unwrap(),
            vec![
                PiCheckpoint { x: 10, pi_x: 4 },
                PiCheckpoint { x: 100, pi_x: 25 }
            ]
        );
        let got = pi_at(&[2, 3, 4, 5, 97, 98]).unwrap();
        let counts: Vec<u64> = got.iter().map(|c| c.pi_x).collect();
        assert_eq!(counts, vec![1, 2, 2, 3, 25, 25]);
    }

    #[test]
    fn pi_at_rejects_bad_lists() {
        assert_eq!(pi_at(&[]), Err(SieveError::EmptyPoints));
        assert_eq!(
            pi_at(&[10, 5]),
            Err(SieveError::Unsorted { prev: 10, next: 5 })
        );
        assert!(matches!(pi_at(&[4, 4]), Err(SieveError::Unsorted { .. })));
    }

    #[test]
    fn bound_cap_is_enforced() {
        let sieve = Sieve::new(SieveConfig::default().with_max_bound(1000)).unwrap();
        assert!(sieve.primes_up_to(1000).is_ok());
        let err = sieve.primes_up_to(1001).unwrap_err();
        assert_eq!(
            err,
            SieveError::BoundTooLarge {
                requested: 1001,
                max: 1000
            }
        );
        assert!(err.is_resource_limit());
        assert!(primes_up_to(DEFAULT_MAX_BOUND + 1).is_err());
    }

    #[test]
    fn invalid_config() {
        assert!(Sieve::new(SieveConfig::default().with_segment_size(1)).is_err());
        assert!(Sieve::new(SieveConfig::default().with_workers(0)).is_err());
    }

    #[test]
    fn workers_do_not_change_output() {
        let one = Sieve::new(SieveConfig::default().with_segment_size(1024)).unwrap();
        let four = Sieve::new(
            SieveConfig::default()
                .with_segment_size(1024)
                .with_workers(4),
        )
        .unwrap();
        assert_eq!(
            one.primes_vec(200_000).unwrap(),
            four.primes_vec(200_000).unwrap()
        );
        let pts = [1, 2, 1000, 1024, 1025, 65_537, 199_999];
        assert_eq!(one.pi_at(&pts).unwrap(), four.pi_at(&pts).unwrap());
    }
}
