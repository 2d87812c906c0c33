//! The harmonic law on `{1, ..., n}` and its representation by independent
//! geometric exponents.
//!
//! If `eps_p`, `p <= n`, are independent with `P[eps_p = m] = (1 - 1/p) p^-m`,
//! then `P[prod p^eps_p = k] = prod (1 - 1/p) / k` for every `k <= n`. Given
//! the event `A_n = {prod p^eps_p <= n}` the product is therefore harmonic,
//! and any additive function of `H_n` has the law of the corresponding sum
//! over the exponents, conditioned on `A_n`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use rand::RngCore;

use crate::error::{domain, Error, Result};
use crate::math::{exp, log, log1p, KahanSum};
use crate::primes::PrimeTable;
use crate::rng::{geometric_failures, unit};
use crate::thinning::DyadicBlocks;

/// Default rejection budget for conditioned samplers.
pub const DEFAULT_MAX_REJECTIONS: u32 = 1000;

/// `P[H_n = k] = 1 / (k L_n)` on `1..=n`.
#[derive(Debug, Clone)]
pub struct HarmonicLaw {
    n: u64,
    l_n: f64,
    // cumulative[k - 1] = sum_{j <= k} 1/j
    cumulative: Vec<f64>,
}

impl HarmonicLaw {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(domain("harmonic law needs n >= 1"));
        }
        if n > crate::primes::MAX_SIEVE_LIMIT {
            return Err(Error::Resource(alloc::format!("harmonic table for n = {n} is too large")));
        }
        let mut acc = KahanSum::new();
        let cumulative: Vec<f64> = (1..=n)
            .map(|k| {
                acc.add(1.0 / k as f64);
                acc.value()
            })
            .collect();
        Ok(HarmonicLaw { n, l_n: cumulative[cumulative.len() - 1], cumulative })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Normalizer `L_n = sum_{k <= n} 1/k`.
    pub fn normalizer(&self) -> f64 {
        self.l_n
    }

    pub fn pmf(&self, k: u64) -> f64 {
        if k == 0 || k > self.n {
            0.0
        } else {
            1.0 / (k as f64 * self.l_n)
        }
    }

    pub fn cdf(&self, k: u64) -> f64 {
        match k {
            0 => 0.0,
            k if k >= self.n => 1.0,
            k => self.cumulative[k as usize - 1] / self.l_n,
        }
    }

    /// Inverse-CDF draw.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> u64 {
        let target = unit(rng) * self.l_n;
        let idx = self.cumulative.partition_point(|&c| c <= target);
        (idx as u64 + 1).min(self.n)
    }
}

/// Sparse exponent vector `(eps_p)` standing for the integer `prod p^eps_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricFactorization {
    n: u64,
    exponents: Vec<(u64, u32)>,
    log_value: f64,
}

impl GeometricFactorization {
    pub fn empty(n: u64) -> Self {
        GeometricFactorization { n, exponents: Vec::new(), log_value: 0.0 }
    }

    /// Builds from `(prime, exponent)` pairs; zero exponents are dropped.
    pub fn from_exponents(n: u64, mut exponents: Vec<(u64, u32)>) -> Self {
        exponents.retain(|&(_, e)| e > 0);
        exponents.sort_unstable_by_key(|&(p, _)| p);
        let log_value = exponents.iter().map(|&(p, e)| e as f64 * log(p as f64)).sum();
        GeometricFactorization { n, exponents, log_value }
    }

    fn push(&mut self, p: u64, e: u32) {
        debug_assert!(self.exponents.last().is_none_or(|&(q, _)| q < p));
        self.exponents.push((p, e));
        self.log_value += e as f64 * log(p as f64);
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Nonzero exponents, ascending in `p`.
    pub fn exponents(&self) -> &[(u64, u32)] {
        &self.exponents
    }

    pub fn exponent_of(&self, p: u64) -> u32 {
        self.exponents.binary_search_by_key(&p, |&(q, _)| q).map_or(0, |i| self.exponents[i].1)
    }

    /// `sum eps_p log p`.
    pub fn log_value(&self) -> f64 {
        self.log_value
    }

    /// `prod p^eps_p` when it fits in a `u64`.
    pub fn product(&self) -> Option<u64> {
        self.exponents.iter().try_fold(1u64, |acc, &(p, e)| {
            p.checked_pow(e).and_then(|pe| acc.checked_mul(pe))
        })
    }

    /// Whether `A_n = {prod p^eps_p <= n}` holds. Exact whenever the product is
    /// representable, otherwise decided in log space with `1e-12` slack.
    pub fn in_event(&self) -> bool {
        match self.product() {
            Some(v) => v <= self.n,
            None => self.log_value <= log(self.n as f64) + 1e-12,
        }
    }
}

/// Samples exponent vectors for primes `<= n`.
#[derive(Debug, Clone)]
pub struct GeometricSampler<'a> {
    n: u64,
    primes: &'a [u32],
    blocks: DyadicBlocks,
}

/// A conditioned draw plus the number of attempts it took.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditioned<T> {
    pub value: T,
    pub trials: u32,
}

impl<'a> GeometricSampler<'a> {
    pub fn new(n: u64, table: &'a PrimeTable) -> Result<Self> {
        if n == 0 {
            return Err(domain("n must be positive"));
        }
        if table.limit() < n {
            return Err(domain(alloc::format!("prime table limit {} is below n = {n}", table.limit())));
        }
        let primes = table.up_to(n);
        Ok(GeometricSampler { n, primes, blocks: DyadicBlocks::new(primes) })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Independent geometric exponents for every `p <= n`. Only primes with
    /// `eps_p >= 1` are touched: `P[eps_p >= 1] = 1/p`, and given that,
    /// `eps_p - 1` is again geometric with the same ratio.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> GeometricFactorization {
        let mut g = GeometricFactorization::empty(self.n);
        let _ = self.blocks.walk(self.primes, rng, |p| 1.0 / p as f64, |p, rng| {
            let e = 1 + geometric_failures(rng, 1.0 / p as f64);
            g.push(p, e.min(u32::MAX as u64) as u32);
            ControlFlow::Continue(())
        });
        g
    }

    // One attempt at a draw inside A_n; gives up as soon as the running
    // product passes n (the partial draw is discarded, so this is exact).
    fn attempt<R: RngCore + ?Sized>(&self, rng: &mut R) -> Option<GeometricFactorization> {
        let mut g = GeometricFactorization::empty(self.n);
        let mut product: u64 = 1;
        let n = self.n;
        let flow = self.blocks.walk(self.primes, rng, |p| 1.0 / p as f64, |p, rng| {
            let e = 1 + geometric_failures(rng, 1.0 / p as f64);
            let mut v = product;
            for _ in 0..e {
                v = v.saturating_mul(p);
                if v > n {
                    return ControlFlow::Break(());
                }
            }
            product = v;
            g.push(p, e as u32);
            ControlFlow::Continue(())
        });
        match flow {
            ControlFlow::Continue(()) => Some(g),
            ControlFlow::Break(()) => None,
        }
    }

    /// Rejection sampler for the exponent vector conditioned on `A_n`.
    pub fn sample_conditioned<R: RngCore + ?Sized>(
        &self,
        rng: &mut R,
        max_rejections: u32,
    ) -> Result<Conditioned<GeometricFactorization>> {
        for trials in 1..=max_rejections.max(1) {
            if let Some(g) = self.attempt(rng) {
                return Ok(Conditioned { value: g, trials });
            }
        }
        Err(Error::RejectionBudget { attempts: max_rejections.max(1) })
    }
}

/// Independent geometric exponents for all primes `<= n`.
pub fn sample_geometric_vector<R: RngCore + ?Sized>(
    n: u64,
    table: &PrimeTable,
    rng: &mut R,
) -> Result<GeometricFactorization> {
    Ok(GeometricSampler::new(n, table)?.sample(rng))
}

/// Exponent vector conditioned on `A_n` by rejection.
pub fn sample_conditioned<R: RngCore + ?Sized>(
    n: u64,
    table: &PrimeTable,
    rng: &mut R,
    max_rejections: u32,
) -> Result<Conditioned<GeometricFactorization>> {
    if n < 2 {
        return Err(domain("conditioned sampling needs n >= 2"));
    }
    GeometricSampler::new(n, table)?.sample_conditioned(rng, max_rejections)
}

/// `P[A_n] = L_n prod_{p <= n} (1 - 1/p)`, exactly.
pub fn exact_pa(n: u64, table: &PrimeTable) -> Result<f64> {
    if n < 2 {
        return Err(domain("exact_pa needs n >= 2"));
    }
    if table.limit() < n {
        return Err(domain("prime table does not reach n"));
    }
    let log_prod = crate::math::ksum(table.up_to(n).iter().map(|&p| log1p(-1.0 / p as f64)));
    Ok(crate::math::harmonic_number(n) * exp(log_prod))
}

/// Law of `prod p^eps_p` restricted to `A_n`, found by enumerating every
/// exponent vector with product `<= n` and multiplying geometric pmfs.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumeratedLaw {
    /// `conditional[k - 1] = P[prod = k | A_n]`
    pub conditional: Vec<f64>,
    /// `P[A_n]`
    pub event_mass: f64,
}

/// Enumeration oracle for small `n` (cost grows like `n`).
pub fn enumerate_conditional_law(n: u64, table: &PrimeTable) -> Result<EnumeratedLaw> {
    if !(1..=1_000_000).contains(&n) {
        return Err(domain("enumeration supports 1 <= n <= 1e6"));
    }
    if table.limit() < n.max(2) {
        return Err(domain("prime table does not reach n"));
    }
    let primes: Vec<u64> = table.up_to(n).iter().map(|&p| p as u64).collect();
    // all exponents zero
    let zero_mass: f64 = primes.iter().map(|&p| 1.0 - 1.0 / p as f64).product();
    let mut joint = vec![0.0f64; n as usize];

    // Depth-first over primes; `ratio` is the product of pmf(e)/pmf(0) = p^-e.
    fn dfs(primes: &[u64], start: usize, value: u64, ratio: f64, n: u64, zero_mass: f64, joint: &mut [f64]) {
        joint[value as usize - 1] += zero_mass * ratio;
        for i in start..primes.len() {
            let p = primes[i];
            if value.saturating_mul(p) > n {
                break;
            }
            let mut v = value * p;
            let mut r = ratio / p as f64;
            loop {
                dfs(primes, i + 1, v, r, n, zero_mass, joint);
                match v.checked_mul(p) {
                    Some(next) if next <= n => {
                        v = next;
                        r /= p as f64;
                    }
                    _ => break,
                }
            }
        }
    }
    dfs(&primes, 0, 1, 1.0, n, zero_mass, &mut joint);
    let event_mass = crate::math::ksum(joint.iter().copied());
    let conditional = joint.iter().map(|&m| m / event_mass).collect();
    Ok(EnumeratedLaw { conditional, event_mass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::EXP_NEG_GAMMA;
    use crate::primes::sieve;
    use crate::rng::stream;

    fn within_sigma(freq: f64, p: f64, draws: usize, k: f64) -> bool {
        (freq - p).abs() <= k * (p * (1.0 - p) / draws as f64).sqrt()
    }

    #[test]
    fn degenerate_and_small_laws() {
        let law = HarmonicLaw::new(1).unwrap();
        let mut rng = stream(1, 0);
        assert!((0..100).all(|_| law.sample(&mut rng) == 1));
        let law = HarmonicLaw::new(3).unwrap();
        assert!((law.normalizer() - 11.0 / 6.0).abs() < 1e-15);
        assert!((law.pmf(1) - 6.0 / 11.0).abs() < 1e-15);
        assert!((law.pmf(3) - 2.0 / 11.0).abs() < 1e-15);
        let draws = 1_000_000;
        let mut counts = [0usize; 4];
        for _ in 0..draws {
            counts[law.sample(&mut rng) as usize] += 1;
        }
        for k in 1..=3 {
            assert!(within_sigma(counts[k] as f64 / draws as f64, law.pmf(k as u64), draws, 3.0));
        }
    }

    #[test]
    fn pmf_sums_to_one() {
        let law = HarmonicLaw::new(100_000).unwrap();
        let total = crate::math::ksum((1..=100_000).map(|k| law.pmf(k)));
        assert!((total - 1.0).abs() < 1e-12);
        let direct: f64 = (1..=100_000u64).map(|k| 1.0 / k as f64).sum();
        assert!((law.normalizer() - direct).abs() / direct < 1e-12);
        assert_eq!(law.cdf(100_000), 1.0);
    }

    #[test]
    fn mean_log_ratio() {
        let n = 1_000_000u64;
        let law = HarmonicLaw::new(n).unwrap();
        let ln = log(n as f64);
        // direct-sum oracle for E[log H / log n] and its variance
        let m1 = crate::math::ksum((1..=n).map(|k| law.pmf(k) * log(k as f64) / ln));
        let m2 = crate::math::ksum((1..=n).map(|k| law.pmf(k) * (log(k as f64) / ln).powi(2)));
        let sd = (m2 - m1 * m1).sqrt();
        let mut rng = stream(2, 0);
        let draws = 1_000_000;
        let mean = (0..draws).map(|_| log(law.sample(&mut rng) as f64) / ln).sum::<f64>() / draws as f64;
        assert!((mean - m1).abs() < 3.0 * sd / (draws as f64).sqrt());
    }

    #[test]
    fn geometric_marginals() {
        let t = sieve(100).unwrap();
        let s = GeometricSampler::new(100, &t).unwrap();
        let mut rng = stream(4, 0);
        let draws = 1_000_000;
        let (mut zero2, mut tail3, mut nonzero) = (0usize, 0usize, 0usize);
        for _ in 0..draws {
            let g = s.sample(&mut rng);
            zero2 += (g.exponent_of(2) == 0) as usize;
            tail3 += (g.exponent_of(3) >= 2) as usize;
            nonzero += g.exponents().len();
        }
        assert!(within_sigma(zero2 as f64 / draws as f64, 0.5, draws, 3.0));
        assert!(within_sigma(tail3 as f64 / draws as f64, 1.0 / 9.0, draws, 3.0));
        // count of nonzero exponents is a sum of independent Bernoulli(1/p)
        let mean: f64 = t.iter().map(|p| 1.0 / p as f64).sum();
        let var: f64 = t.iter().map(|p| (1.0 / p as f64) * (1.0 - 1.0 / p as f64)).sum();
        assert!((mean - 1.8029).abs() < 1e-4);
        assert!((nonzero as f64 / draws as f64 - mean).abs() < 3.0 * (var / draws as f64).sqrt());
    }

    #[test]
    fn conditioned_n2() {
        let t = sieve(2).unwrap();
        let mut rng = stream(5, 0);
        let draws = 300_000;
        let mut ones = 0;
        for _ in 0..draws {
            let g = sample_conditioned(2, &t, &mut rng, DEFAULT_MAX_REJECTIONS).unwrap().value;
            assert!(g.in_event());
            ones += (g.product() == Some(1)) as usize;
        }
        assert!(within_sigma(ones as f64 / draws as f64, 2.0 / 3.0, draws, 3.0));
        let law = enumerate_conditional_law(2, &t).unwrap();
        assert!((law.conditional[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((law.event_mass - 0.75).abs() < 1e-15);
    }

    #[test]
    fn conditioned_matches_harmonic_n30() {
        let t = sieve(30).unwrap();
        let s = GeometricSampler::new(30, &t).unwrap();
        let law = HarmonicLaw::new(30).unwrap();
        let mut rng = stream(6, 0);
        let draws = 1_000_000;
        let mut counts = [0usize; 31];
        let mut trials = 0u64;
        for _ in 0..draws {
            let c = s.sample_conditioned(&mut rng, DEFAULT_MAX_REJECTIONS).unwrap();
            trials += c.trials as u64;
            counts[c.value.product().unwrap() as usize] += 1;
        }
        let mut emp = 0.0;
        let mut ks: f64 = 0.0;
        for k in 1..=30u64 {
            emp += counts[k as usize] as f64 / draws as f64;
            ks = ks.max((emp - law.cdf(k)).abs());
        }
        assert!(ks <= 0.01);
        let pa = exact_pa(30, &t).unwrap();
        let rate = draws as f64 / trials as f64;
        let se = (pa * (1.0 - pa) / trials as f64).sqrt();
        assert!((rate - pa).abs() <= 3.0 * se, "rate {rate} pa {pa}");
    }

    #[test]
    fn representation_identity_by_enumeration() {
        let t = sieve(50).unwrap();
        for n in 1..=50u64 {
            let law = HarmonicLaw::new(n).unwrap();
            let e = enumerate_conditional_law(n, &t).unwrap();
            for k in 1..=n {
                assert!((e.conditional[k as usize - 1] - law.pmf(k)).abs() <= 1e-12);
            }
            if n >= 2 {
                assert!((e.event_mass - exact_pa(n, &t).unwrap()).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn exact_pa_values() {
        let t = sieve(100_000).unwrap();
        assert!((exact_pa(2, &t).unwrap() - 0.75).abs() < 1e-12);
        let pa21 = exact_pa(21, &t).unwrap();
        assert!((pa21 - 0.6234439088).abs() < 1e-9 && pa21 >= 0.5);
        for n in 21..=2000 {
            assert!(exact_pa(n, &t).unwrap() >= 0.5);
        }
        let grid = [1_000u64, 10_000, 100_000];
        let vals: Vec<f64> = grid.iter().map(|&n| exact_pa(n, &t).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert!((vals[2] - EXP_NEG_GAMMA).abs() < 5.0 / log(1e5));
        assert!(exact_pa(1, &t).is_err());
    }

    #[test]
    fn event_check_is_exact() {
        let g = GeometricFactorization::from_exponents(12, vec![(2, 2), (3, 1)]);
        assert!(g.in_event());
        let g = GeometricFactorization::from_exponents(11, vec![(3, 1), (2, 2)]);
        assert_eq!(g.exponents(), &[(2, 2), (3, 1)]);
        assert!(!g.in_event());
        let huge = GeometricFactorization::from_exponents(100, vec![(2, 200)]);
        assert_eq!(huge.product(), None);
        assert!(!huge.in_event());
        assert!((huge.log_value() - 200.0 * log(2.0)).abs() < 1e-10);
    }

    #[test]
    fn sampler_rejects_short_table() {
        let t = sieve(10).unwrap();
        assert!(GeometricSampler::new(11, &t).is_err());
        assert!(matches!(sample_conditioned(1, &t, &mut stream(0, 0), 10), Err(Error::Domain(_))));
    }
}
