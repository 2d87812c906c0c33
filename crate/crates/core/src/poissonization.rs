//! Compound-Poisson representation of the geometric exponents.
//!
//! Let `N(p, k)` be independent Poisson counts with mean `1/(k p^k)`. Then
//! `sum_k k N(p, k)` is geometric with ratio `1/p`, which is the identity
//! `-log(1 - x) = sum_k x^k / k` read through probability generating
//! functions. Linear functionals of the exponents become integrals against
//! the point process `N`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use rand::RngCore;

use crate::error::{domain, Result};
use crate::harmonic::GeometricFactorization;
use crate::math::{exp, expm1, pow, KahanSum};
use crate::primes::PrimeTable;
use crate::rng::unit;
use crate::thinning::DyadicBlocks;

/// Default level cap: the neglected mass `sum_{k > 64} 1/(k 2^k)` is below `1e-20`.
pub const DEFAULT_K_CAP: u32 = 64;

/// Nonzero Poisson counts `N(p, k)` for `p <= n`, `k <= k_cap`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonizedExponents {
    pub n: u64,
    pub k_cap: u32,
    /// `(p, k, N(p, k))`, ascending in `(p, k)`, counts `>= 1`.
    pub counts: Vec<(u64, u32, u32)>,
    /// Upper bound on `P[some eps_p differs from its untruncated value]`.
    pub truncation_bound: f64,
}

impl PoissonizedExponents {
    pub fn count(&self, p: u64, k: u32) -> u32 {
        self.counts
            .binary_search_by(|&(q, l, _)| (q, l).cmp(&(p, k)))
            .map_or(0, |i| self.counts[i].2)
    }

    /// `eps_p = sum_k k N(p, k)`.
    pub fn reconstruct_epsilon(&self) -> GeometricFactorization {
        let mut exps: Vec<(u64, u32)> = Vec::new();
        for &(p, k, c) in &self.counts {
            match exps.last_mut() {
                Some((q, e)) if *q == p => *e += k * c,
                _ => exps.push((p, k * c)),
            }
        }
        GeometricFactorization::from_exponents(self.n, exps)
    }

    /// `N[g] = sum_{(p, k)} N(p, k) g(p, k)`.
    pub fn poisson_integral<G: Fn(u64, u32) -> f64>(&self, g: G) -> f64 {
        self.counts.iter().map(|&(p, k, c)| c as f64 * g(p, k)).sum()
    }
}

/// Intensity `nu(p, k) = 1 / (k p^k)`.
#[inline]
pub fn intensity(p: u64, k: u32) -> f64 {
    1.0 / (k as f64 * pow(p as f64, k as f64))
}

/// `sum_{k <= k_cap} nu(p, k)`: the mean number of points above `p`.
pub fn level_mass(p: u64, k_cap: u32) -> f64 {
    let mut acc = KahanSum::new();
    for k in 1..=k_cap {
        let t = intensity(p, k);
        acc.add(t);
        if t < acc.value() * 1e-18 {
            break;
        }
    }
    acc.value()
}

/// `sum_{p <= n} sum_{k > k_cap} nu(p, k)`.
pub fn truncation_tail(n: u64, k_cap: u32, table: &PrimeTable) -> f64 {
    let mut total = KahanSum::new();
    for p in table.up_to(n).iter().map(|&p| p as u64) {
        let first = intensity(p, k_cap + 1);
        if first == 0.0 {
            break;
        }
        let mut k = k_cap + 1;
        let mut t = first;
        while t > first * 1e-18 && t > 0.0 {
            total.add(t);
            k += 1;
            t = intensity(p, k);
        }
    }
    total.value()
}

/// Sparse sampler for the Poissonized exponents.
#[derive(Debug, Clone)]
pub struct PoissonSampler<'a> {
    n: u64,
    k_cap: u32,
    primes: &'a [u32],
    blocks: DyadicBlocks,
    truncation_bound: f64,
}

impl<'a> PoissonSampler<'a> {
    pub fn new(n: u64, k_cap: u32, table: &'a PrimeTable) -> Result<Self> {
        if k_cap == 0 {
            return Err(domain("k_cap must be at least 1"));
        }
        if n == 0 || table.limit() < n {
            return Err(domain("n must be positive and covered by the prime table"));
        }
        let primes = table.up_to(n);
        Ok(PoissonSampler {
            n,
            k_cap,
            primes,
            blocks: DyadicBlocks::new(primes),
            truncation_bound: truncation_tail(n, k_cap, table),
        })
    }

    pub fn truncation_bound(&self) -> f64 {
        self.truncation_bound
    }

    /// At each prime the total number of points is Poisson with mean
    /// `lambda_p = sum_k nu(p, k)`; it is nonzero with probability
    /// `1 - e^{-lambda_p} <= 1/p`, so only those primes are visited. Each
    /// point then gets a level from the normalized log-series law.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> PoissonizedExponents {
        let k_cap = self.k_cap;
        let mut counts = Vec::new();
        let _ = self.blocks.walk(
            self.primes,
            rng,
            |p| -expm1(-level_mass(p, k_cap)),
            |p, rng| {
                let lambda = level_mass(p, k_cap);
                let total = zero_truncated_poisson(rng, lambda);
                let mut levels: Vec<u32> = (0..total).map(|_| log_series_level(rng, p, k_cap, lambda)).collect();
                levels.sort_unstable();
                let start = counts.len();
                for k in levels {
                    match counts[start..].last_mut() {
                        Some((_, l, c)) if *l == k => *c += 1,
                        _ => counts.push((p, k, 1u32)),
                    }
                }
                ControlFlow::Continue(())
            },
        );
        PoissonizedExponents { n: self.n, k_cap, counts, truncation_bound: self.truncation_bound }
    }
}

/// Convenience wrapper building a [`PoissonSampler`] for one draw.
pub fn sample_poissonized<R: RngCore + ?Sized>(
    n: u64,
    k_cap: u32,
    table: &PrimeTable,
    rng: &mut R,
) -> Result<PoissonizedExponents> {
    Ok(PoissonSampler::new(n, k_cap, table)?.sample(rng))
}

// Poisson(lambda) conditioned on >= 1, by sequential inversion.
fn zero_truncated_poisson<R: RngCore + ?Sized>(rng: &mut R, lambda: f64) -> u32 {
    let target = unit(rng) * -expm1(-lambda);
    let mut t = 1u32;
    let mut term = exp(-lambda) * lambda;
    let mut cum = term;
    while cum <= target {
        t += 1;
        term *= lambda / t as f64;
        if term == 0.0 {
            break;
        }
        cum += term;
    }
    t
}

// Level k with probability nu(p, k) / lambda, k <= k_cap.
fn log_series_level<R: RngCore + ?Sized>(rng: &mut R, p: u64, k_cap: u32, lambda: f64) -> u32 {
    let target = unit(rng) * lambda;
    let mut cum = 0.0;
    for k in 1..=k_cap {
        cum += intensity(p, k);
        if cum > target {
            return k;
        }
    }
    k_cap
}

/// Exact pmf of `sum_{k <= k_cap} k N(p, k)` on `{0, ..., max_value}`, by
/// convolving the Poisson atoms level by level.
pub fn exact_epsilon_pmf(p: u64, k_cap: u32, max_value: usize) -> Result<Vec<f64>> {
    if p < 2 || k_cap == 0 {
        return Err(domain("need p >= 2 and k_cap >= 1"));
    }
    let mut dist = vec![0.0; max_value + 1];
    dist[0] = 1.0;
    for k in 1..=k_cap as usize {
        let lambda = intensity(p, k as u32);
        // pmf of k * Poisson(lambda) on multiples of k
        let mut atoms = Vec::new();
        let mut term = exp(-lambda);
        let mut j = 0usize;
        while j * k <= max_value {
            atoms.push(term);
            j += 1;
            term *= lambda / j as f64;
        }
        let mut next = vec![0.0; max_value + 1];
        for (v, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (j, &a) in atoms.iter().enumerate() {
                let w = v + j * k;
                if w > max_value {
                    break;
                }
                next[w] += mass * a;
            }
        }
        dist = next;
    }
    Ok(dist)
}

/// `P[eps = m] = (1 - 1/p) p^-m`.
pub fn geometric_pmf(p: u64, m: u32) -> f64 {
    (1.0 - 1.0 / p as f64) * pow(p as f64, -(m as f64))
}
