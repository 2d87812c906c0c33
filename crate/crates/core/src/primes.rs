//! Prime tables and the Mertens prime sums.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::math::{fabs, log, KahanSum};

/// Largest sieve limit accepted by [`sieve`]. Primes are stored as `u32`.
pub const MAX_SIEVE_LIMIT: u64 = 1_000_000_000;

/// Odd numbers covered by one sieve segment (one byte each, 64 KiB).
pub const SEGMENT_ODDS: u64 = 1 << 16;

/// All primes up to `limit`, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u32>,
}

impl PrimeTable {
    /// Rebuilds a table from parts, checking ordering and range. Primality
    /// of the entries is the caller's responsibility (used by the on-disk cache).
    pub fn from_parts(limit: u64, primes: Vec<u32>) -> Result<Self> {
        if !(2..=MAX_SIEVE_LIMIT).contains(&limit) {
            return Err(domain("prime table limit outside [2, 1e9]"));
        }
        if primes.first() != Some(&2) {
            return Err(domain("prime table must start at 2"));
        }
        if primes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(domain("prime table must be strictly increasing"));
        }
        if primes.last().is_some_and(|&p| p as u64 > limit) {
            return Err(domain("prime table holds a value above its limit"));
        }
        Ok(PrimeTable { limit, primes })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.primes
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = u64> + ExactSizeIterator + '_ {
        self.primes.iter().map(|&p| p as u64)
    }

    /// `pi(x)`: number of table primes `<= x`.
    pub fn count_up_to(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| (p as u64) <= x)
    }

    /// Primes `<= x` as a slice.
    pub fn up_to(&self, x: u64) -> &[u32] {
        &self.primes[..self.count_up_to(x)]
    }

    /// Membership test by binary search; only meaningful for `p <= limit`.
    pub fn contains(&self, p: u64) -> bool {
        p <= u32::MAX as u64 && self.primes.binary_search(&(p as u32)).is_ok()
    }
}

/// Deterministic trial-division primality test.
pub fn is_prime_trial(k: u64) -> bool {
    if k < 2 {
        return false;
    }
    if k < 4 {
        return true;
    }
    if k.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d <= k / d {
        if k.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Primes up to `limit` by a plain sieve. Used for the base primes.
fn small_sieve(limit: u64) -> Vec<u32> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u32);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Base primes needed to sieve up to `limit`: odd primes `<= sqrt(limit)`.
pub fn base_primes(limit: u64) -> Vec<u32> {
    let root = libm::sqrt(limit as f64) as u64 + 1;
    small_sieve(root).into_iter().filter(|&p| p != 2).collect()
}

/// Appends the odd primes in `[lo, hi)` to `out`.
///
/// `base` must hold every odd prime up to `sqrt(hi)`. Disjoint ranges can be
/// sieved independently and concatenated in order.
pub fn sieve_range(lo: u64, hi: u64, base: &[u32], out: &mut Vec<u32>) {
    let lo = if lo.is_multiple_of(2) { lo + 1 } else { lo }.max(3);
    if lo >= hi {
        return;
    }
    // index i represents lo + 2i
    let odds = (hi - lo).div_ceil(2) as usize;
    let mut composite = vec![false; odds];
    for &p in base {
        let p = p as u64;
        if p * p >= hi {
            break;
        }
        let mut start = p * p;
        if start < lo {
            start = lo.div_ceil(p) * p;
        }
        if start.is_multiple_of(2) {
            start += p;
        }
        let mut i = ((start - lo) / 2) as usize;
        while i < odds {
            composite[i] = true;
            i += p as usize;
        }
    }
    for (i, &c) in composite.iter().enumerate() {
        let v = lo + 2 * i as u64;
        if !c && v < hi {
            out.push(v as u32);
        }
    }
}

/// Segment boundaries `[lo, hi)` covering `[3, limit]`.
pub fn segments(limit: u64) -> impl Iterator<Item = (u64, u64)> {
    let span = 2 * SEGMENT_ODDS;
    let end = limit + 1;
    (0..).map(move |i| 3 + i * span).take_while(move |&lo| lo < end).map(move |lo| (lo, (lo + span).min(end)))
}

/// Segmented sieve of Eratosthenes returning every prime `<= limit`.
pub fn sieve(limit: u64) -> Result<PrimeTable> {
    if limit < 2 {
        return Err(domain("sieve limit must be at least 2"));
    }
    if limit > MAX_SIEVE_LIMIT {
        return Err(Error::Resource(alloc::format!(
            "sieve limit {limit} exceeds the supported maximum {MAX_SIEVE_LIMIT}"
        )));
    }
    let base = base_primes(limit);
    let mut primes = vec![2u32];
    for (lo, hi) in segments(limit) {
        sieve_range(lo, hi, &base, &mut primes);
    }
    Ok(PrimeTable { limit, primes })
}

/// The two Mertens sums at a cutoff `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MertensSums {
    pub n: u64,
    /// `sum_{p <= n} log p / p`
    pub log_weighted_sum: f64,
    /// `sum_{p <= n} 1 / p`
    pub reciprocal_sum: f64,
    /// `|log_weighted_sum - log n|`
    pub deviation1: f64,
    /// `reciprocal_sum - log log n`; converges to the Meissel-Mertens constant.
    pub deviation2_centered: f64,
}

impl MertensSums {
    fn at(n: u64, log_weighted: f64, reciprocal: f64) -> Self {
        let ln = log(n as f64);
        MertensSums {
            n,
            log_weighted_sum: log_weighted,
            reciprocal_sum: reciprocal,
            deviation1: fabs(log_weighted - ln),
            deviation2_centered: reciprocal - log(ln),
        }
    }

    /// `deviation1 * log n / 2`: values above one mean the sharper bound
    /// `2 / log n` does not hold at this `n`.
    pub fn sharp_bound_ratio(&self) -> f64 {
        self.deviation1 * log(self.n as f64) / 2.0
    }
}

/// Both Mertens sums at `n = table.limit()`.
pub fn mertens_sums(table: &PrimeTable) -> Result<MertensSums> {
    mertens_profile(table, &[table.limit()]).map(|mut v| v.remove(0))
}

/// Mertens sums at every cutoff in `cutoffs` (ascending, each `2 <= n <= limit`)
/// in a single pass over the table.
pub fn mertens_profile(table: &PrimeTable, cutoffs: &[u64]) -> Result<Vec<MertensSums>> {
    if table.is_empty() {
        return Err(domain("empty prime table"));
    }
    if cutoffs.windows(2).any(|w| w[0] > w[1]) {
        return Err(domain("cutoffs must be ascending"));
    }
    if cutoffs.first().is_some_and(|&n| n < 2) || cutoffs.last().is_some_and(|&n| n > table.limit()) {
        return Err(domain("cutoffs must lie in [2, table limit]"));
    }
    let mut weighted = KahanSum::new();
    let mut reciprocal = KahanSum::new();
    let mut out = Vec::with_capacity(cutoffs.len());
    let mut primes = table.iter().peekable();
    for &n in cutoffs {
        while let Some(&p) = primes.peek() {
            if p > n {
                break;
            }
            let pf = p as f64;
            weighted.add(log(pf) / pf);
            reciprocal.add(1.0 / pf);
            primes.next();
        }
        out.push(MertensSums::at(n, weighted.value(), reciprocal.value()));
    }
    Ok(out)
}

/// Estimate of the constant `c1` in `sum_{p <= n} 1/p = log log n + c1 + O(1/log n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MertensConstantEstimate {
    /// `deviation2_centered` at the largest cutoff.
    pub estimate: f64,
    /// Max minus min of `deviation2_centered` across the inputs.
    pub spread: f64,
    pub n: u64,
}

/// Estimates `c1` from sums at increasing cutoffs (at least two, largest `>= 1e5`).
pub fn estimate_mertens_constant(sums: &[MertensSums]) -> Result<MertensConstantEstimate> {
    if sums.len() < 2 {
        return Err(domain("need at least two Mertens sums to estimate c1"));
    }
    if sums.windows(2).any(|w| w[0].n >= w[1].n) {
        return Err(domain("Mertens sums must be at strictly increasing n"));
    }
    let last = sums[sums.len() - 1];
    if last.n < 100_000 {
        return Err(domain("largest cutoff must be at least 1e5"));
    }
    let (lo, hi) = sums
        .iter()
        .map(|s| s.deviation2_centered)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| (lo.min(d), hi.max(d)));
    Ok(MertensConstantEstimate { estimate: last.deviation2_centered, spread: hi - lo, n: last.n })
}
