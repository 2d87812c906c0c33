//! Additive arithmetic functions induced by a real profile `theta`.
//!
//! Given `theta: [0, inf) -> R` with `theta(0) = 0`, the induced additive
//! function takes the value `theta(l * log p)` on the prime power `p^l` and
//! extends to all integers by summing over the prime factorization.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{domain, Error, Result};
use crate::harmonic::GeometricFactorization;
use crate::math::{log, pow, E};
use crate::primes::{is_prime_trial, PrimeTable};

/// Slowly varying factor `L` in `theta(x) = x^alpha * L(x)`.
#[derive(Debug, Clone, Copy)]
pub enum SlowlyVarying {
    /// `L(x) = 1`
    Constant,
    /// `L(x) = log(1 + x)`
    Log1p,
    /// `L(x) = 1 / log(e + x)`
    InvLogE,
    /// Code-supplied factor.
    Custom(fn(f64) -> f64),
}

impl SlowlyVarying {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            SlowlyVarying::Constant => 1.0,
            SlowlyVarying::Log1p => crate::math::log1p(x),
            SlowlyVarying::InvLogE => 1.0 / log(E + x),
            SlowlyVarying::Custom(f) => f(x),
        }
    }

    /// Config name, `None` for custom factors.
    pub fn name(&self) -> Option<&'static str> {
        match self {
            SlowlyVarying::Constant => Some("constant"),
            SlowlyVarying::Log1p => Some("log1p"),
            SlowlyVarying::InvLogE => Some("inv-log"),
            SlowlyVarying::Custom(_) => None,
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "constant" => Ok(SlowlyVarying::Constant),
            "log1p" => Ok(SlowlyVarying::Log1p),
            "inv-log" => Ok(SlowlyVarying::InvLogE),
            other => Err(domain(alloc::format!(
                "unknown slowly varying factor '{other}' (expected constant, log1p or inv-log)"
            ))),
        }
    }
}

impl PartialEq for SlowlyVarying {
    // custom factors never compare equal
    fn eq(&self, other: &Self) -> bool {
        self.name().is_some() && self.name() == other.name()
    }
}

/// `theta(x) = x^degree * L(x)` for `x > 0`, and `theta(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSpec {
    degree: f64,
    slowly_varying: SlowlyVarying,
    description: String,
}

impl ThetaSpec {
    pub fn new(degree: f64, slowly_varying: SlowlyVarying, description: impl Into<String>) -> Result<Self> {
        if !(degree >= 0.0) || !degree.is_finite() {
            return Err(domain("theta degree must be a finite nonnegative real"));
        }
        Ok(ThetaSpec { degree, slowly_varying, description: description.into() })
    }

    /// Pure power `x^alpha`.
    pub fn power(alpha: f64) -> Result<Self> {
        ThetaSpec::new(alpha, SlowlyVarying::Constant, alloc::format!("x^{alpha}"))
    }

    /// Looks up a catalog entry by name.
    pub fn by_name(name: &str) -> Result<Self> {
        catalog()
            .into_iter()
            .find(|e| e.name == name)
            .map(|e| e.theta)
            .ok_or_else(|| domain(alloc::format!("unknown theta '{name}'")))
    }

    /// `(alpha, L-name)` form used by configs.
    pub fn from_alpha_and_factor(alpha: f64, factor: &str) -> Result<Self> {
        let l = SlowlyVarying::from_name(factor)?;
        ThetaSpec::new(alpha, l, alloc::format!("x^{alpha} * {factor}"))
    }

    pub fn degree(&self) -> f64 {
        self.degree
    }

    pub fn slowly_varying(&self) -> SlowlyVarying {
        self.slowly_varying
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        let power = if self.degree == 0.0 {
            1.0
        } else if self.degree == 1.0 {
            x
        } else if self.degree == 2.0 {
            x * x
        } else {
            pow(x, self.degree)
        };
        power * self.slowly_varying.eval(x)
    }
}

/// A named built-in `theta` with the facts relevant to the limit theorem.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub theta: ThetaSpec,
    /// `theta` is C^1 on `(0, inf)` with the `theta(0) = 0` convention aside.
    pub continuously_differentiable: bool,
    /// Literal "decreasing in a neighborhood of infinity". None of the
    /// growing profiles satisfy it; experiments run on them regardless.
    pub decreasing_near_infinity: bool,
    /// The limit functional `int x^alpha d eta` is finite (needs `alpha > 0`).
    pub limit_simulatable: bool,
}

/// Built-in profiles: `x^0.5`, `x`, `x^2`, `x / log(e + x)` and the prime
/// counting indicator `1{x > 0}`.
pub fn catalog() -> Vec<CatalogEntry> {
    let entry = |name, alpha, l, desc: &str, c1: bool| CatalogEntry {
        name,
        theta: ThetaSpec { degree: alpha, slowly_varying: l, description: String::from(desc) },
        continuously_differentiable: c1,
        decreasing_near_infinity: false,
        limit_simulatable: alpha > 0.0,
    };
    alloc::vec![
        entry("sqrt", 0.5, SlowlyVarying::Constant, "x^0.5", true),
        entry("linear", 1.0, SlowlyVarying::Constant, "x (induces log k)", true),
        entry("square", 2.0, SlowlyVarying::Constant, "x^2", true),
        entry("linear-over-log", 1.0, SlowlyVarying::InvLogE, "x / log(e + x)", true),
        entry("omega", 0.0, SlowlyVarying::Constant, "1{x > 0} (distinct prime factors)", false),
    ]
}

/// `p`-adic valuation of an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Valuation {
    pub p: u64,
    pub exponent: u32,
}

/// Largest `m` with `p^m | k`.
pub fn valuation(k: u64, p: u64) -> Result<Valuation> {
    if k == 0 {
        return Err(domain("valuation needs k >= 1"));
    }
    if !is_prime_trial(p) {
        return Err(domain(alloc::format!("{p} is not prime")));
    }
    Ok(Valuation { p, exponent: strip(&mut { k }, p) })
}

fn strip(k: &mut u64, p: u64) -> u32 {
    let mut m = 0;
    while (*k).is_multiple_of(p) {
        *k /= p;
        m += 1;
    }
    m
}

/// Exact factorization of `k` using the primes in `table`.
///
/// Fails when `k` has a prime factor above `table.limit()`.
pub fn factorize(k: u64, table: &PrimeTable) -> Result<Vec<Valuation>> {
    let (out, rest) = trial_divide(k, table)?;
    if rest > table.limit() {
        return Err(Error::IncompleteFactorization { k, limit: table.limit() });
    }
    Ok(out)
}

/// Factorization by trial division where `table` covers `sqrt(k)`; the
/// leftover cofactor, if any, is a prime above the table.
pub fn factorize_with_cofactor(k: u64, table: &PrimeTable) -> Result<Vec<Valuation>> {
    let limit = table.limit();
    if limit.saturating_mul(limit) < k {
        return Err(Error::IncompleteFactorization { k, limit });
    }
    let (mut out, rest) = trial_divide(k, table)?;
    if rest > limit {
        out.push(Valuation { p: rest, exponent: 1 });
    }
    Ok(out)
}

// Divides out table primes up to sqrt of the running cofactor. A leftover
// `rest <= limit` is itself prime and gets pushed; a larger one is returned.
fn trial_divide(k: u64, table: &PrimeTable) -> Result<(Vec<Valuation>, u64)> {
    if k == 0 {
        return Err(domain("cannot factorize 0"));
    }
    let mut rest = k;
    let mut out = Vec::new();
    for p in table.iter() {
        if p > rest / p {
            break;
        }
        let e = strip(&mut rest, p);
        if e > 0 {
            out.push(Valuation { p, exponent: e });
        }
    }
    if rest > 1 && rest <= table.limit() {
        out.push(Valuation { p: rest, exponent: 1 });
        rest = 1;
    }
    Ok((out, rest))
}

/// The additive function `iota[theta]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveFunction {
    pub theta: ThetaSpec,
}

impl AdditiveFunction {
    pub fn new(theta: ThetaSpec) -> Self {
        AdditiveFunction { theta }
    }

    /// `f(p^l) = theta(l log p)`.
    #[inline]
    pub fn on_prime_power(&self, p: u64, l: u32) -> f64 {
        if l == 0 {
            return 0.0;
        }
        self.theta.eval(l as f64 * log(p as f64))
    }

    /// Sum of prime-power values, ascending in `p`.
    pub fn on_valuations(&self, vals: &[Valuation]) -> f64 {
        vals.iter().map(|v| self.on_prime_power(v.p, v.exponent)).sum()
    }

    /// `f(k)` via the factorization of `k`.
    pub fn evaluate(&self, k: u64, table: &PrimeTable) -> Result<f64> {
        Ok(self.on_valuations(&factorize(k, table)?))
    }

    /// `sum_p theta(eps_p log p)` over the nonzero exponents.
    pub fn evaluate_on_factorization(&self, g: &GeometricFactorization) -> f64 {
        g.exponents().iter().map(|&(p, e)| self.on_prime_power(p, e)).sum()
    }

    /// `f(g) / theta(log n)`: the normalized statistic whose conditioned law
    /// converges to the Dickman-type limit.
    pub fn normalized(&self, g: &GeometricFactorization, n: u64) -> f64 {
        self.evaluate_on_factorization(g) / self.theta.eval(log(n as f64))
    }

    /// `Z_n = sum_p (u1 theta(log p) / theta(log n) + u2 log p / log n) eps_p`.
    pub fn linear_statistic(&self, g: &GeometricFactorization, n: u64, u1: f64, u2: f64) -> f64 {
        let ln = log(n as f64);
        let scale = self.theta.eval(ln);
        g.exponents()
            .iter()
            .map(|&(p, e)| {
                let lp = log(p as f64);
                (u1 * self.theta.eval(lp) / scale + u2 * lp / ln) * e as f64
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::sieve;
    use proptest::prelude::*;

    #[test]
    fn valuations() {
        assert_eq!(valuation(12, 2).unwrap().exponent, 2);
        assert_eq!(valuation(7, 3).unwrap().exponent, 0);
        assert_eq!(valuation(1 << 20, 2).unwrap().exponent, 20);
        assert!(valuation(12, 4).is_err());
        assert!(valuation(0, 2).is_err());
    }

    #[test]
    fn factorizations() {
        let t = sieve(1_000_000).unwrap();
        let v = factorize(60, &t).unwrap();
        assert_eq!(v, [Valuation { p: 2, exponent: 2 }, Valuation { p: 3, exponent: 1 }, Valuation { p: 5, exponent: 1 }]);
        assert!(factorize(1, &t).unwrap().is_empty());
        assert!(is_prime_trial(999_983));
        let v = factorize(32 * 999_983, &t).unwrap();
        assert_eq!(v, [Valuation { p: 2, exponent: 5 }, Valuation { p: 999_983, exponent: 1 }]);
    }

    #[test]
    fn factor_beyond_table_is_an_error() {
        let t = sieve(100).unwrap();
        assert!(matches!(factorize(101, &t), Err(Error::IncompleteFactorization { k: 101, limit: 100 })));
        assert!(matches!(factorize(2 * 103 * 107, &t), Err(Error::IncompleteFactorization { .. })));
        assert_eq!(factorize(97 * 89, &t).unwrap().len(), 2);
        assert!(is_prime_trial(4999));
        let v = factorize_with_cofactor(2 * 4999, &t).unwrap();
        assert_eq!(v, [Valuation { p: 2, exponent: 1 }, Valuation { p: 4999, exponent: 1 }]);
        assert!(factorize_with_cofactor(2 * 9973, &t).is_err());
        assert!(factorize_with_cofactor(10_007 * 10_009, &t).is_err());
    }

    #[test]
    fn evaluations() {
        let t = sieve(1000).unwrap();
        let lin = AdditiveFunction::new(ThetaSpec::by_name("linear").unwrap());
        assert!((lin.evaluate(1000, &t).unwrap() - log(1000.0)).abs() < 1e-12);
        let omega = AdditiveFunction::new(ThetaSpec::by_name("omega").unwrap());
        assert_eq!(omega.evaluate(60, &t).unwrap(), 3.0);
        for f in catalog() {
            assert_eq!(AdditiveFunction::new(f.theta).evaluate(1, &t).unwrap(), 0.0);
        }
    }

    #[test]
    fn on_factorization() {
        let sq = AdditiveFunction::new(ThetaSpec::power(2.0).unwrap());
        let g = GeometricFactorization::from_exponents(10, alloc::vec![(2, 3)]);
        assert!((sq.evaluate_on_factorization(&g) - (3.0 * log(2.0)).powi(2)).abs() < 1e-12);
        assert!((sq.evaluate_on_factorization(&g) - 4.3241).abs() < 1e-4);
        let lin = AdditiveFunction::new(ThetaSpec::power(1.0).unwrap());
        let g = GeometricFactorization::from_exponents(10, alloc::vec![(2, 1), (3, 1)]);
        assert!((lin.evaluate_on_factorization(&g) - log(6.0)).abs() < 1e-15);
        assert_eq!(lin.evaluate_on_factorization(&GeometricFactorization::empty(10)), 0.0);
    }

    #[test]
    fn theta_at_zero_is_zero() {
        let weird = ThetaSpec::new(0.0, SlowlyVarying::Custom(|_| 5.0), "const 5").unwrap();
        assert_eq!(weird.eval(0.0), 0.0);
        assert_eq!(weird.eval(1.0), 5.0);
        assert!(ThetaSpec::power(-1.0).is_err());
    }

    #[test]
    fn regular_variation_ratios() {
        // theta(2x)/theta(x) - 2^alpha is exactly L(2x)/L(x) - 1 up to scale; for
        // log-type L the gap decays like log 2 / log x.
        for e in catalog() {
            let a = e.theta.degree();
            let mut prev = f64::INFINITY;
            let mut x = 10.0;
            while x <= 1e8 {
                let gap = (e.theta.eval(2.0 * x) / e.theta.eval(x) / pow(2.0, a) - 1.0).abs();
                assert!(gap <= prev + 1e-15, "{}", e.name);
                prev = gap;
                x *= 10.0;
            }
            match e.theta.slowly_varying() {
                SlowlyVarying::Constant => assert!(prev < 1e-12),
                _ => assert!(prev < 0.04 && (prev - log(2.0) / log(1e8)).abs() < 5e-3),
            }
        }
        let l1p = ThetaSpec::from_alpha_and_factor(1.5, "log1p").unwrap();
        let gap = (l1p.eval(2e8) / l1p.eval(1e8) / pow(2.0, 1.5) - 1.0).abs();
        assert!(gap < 0.04);
    }

    #[test]
    fn degree_one_is_log() {
        let t = sieve(100_000).unwrap();
        let lin = AdditiveFunction::new(ThetaSpec::by_name("linear").unwrap());
        for k in 1..=100_000u64 {
            let v = lin.evaluate(k, &t).unwrap();
            let l = log(k as f64);
            assert!((v - l).abs() <= 1e-10 * l.max(1e-300) + if k == 1 { 0.0 } else { 1e-14 });
        }
    }

    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 { a } else { gcd(b, a % b) }
    }

    proptest! {
        #[test]
        fn additive_on_coprime_pairs(a in 1u64..1_000_000, b in 1u64..1000, which in 0usize..5) {
            prop_assume!(gcd(a, b) == 1);
            let t = sieve_cached();
            let f = AdditiveFunction::new(catalog()[which].theta.clone());
            let ab = f.evaluate(a * b, t).unwrap();
            let sum = f.evaluate(a, t).unwrap() + f.evaluate(b, t).unwrap();
            prop_assert!((ab - sum).abs() <= 1e-10 * ab.abs().max(1.0));
        }

        #[test]
        fn consistency_with_factorization(k in 1u64..1_000_000, which in 0usize..5) {
            let t = sieve_cached();
            let f = AdditiveFunction::new(catalog()[which].theta.clone());
            let vals = factorize(k, t).unwrap();
            let g = GeometricFactorization::from_exponents(k, vals.iter().map(|v| (v.p, v.exponent)).collect());
            prop_assert_eq!(f.evaluate(k, t).unwrap(), f.evaluate_on_factorization(&g));
            let prod: u64 = vals.iter().map(|v| v.p.pow(v.exponent)).product();
            prop_assert_eq!(prod, k);
        }
    }

    fn sieve_cached() -> &'static PrimeTable {
        static TABLE: std::sync::OnceLock<PrimeTable> = std::sync::OnceLock::new();
        TABLE.get_or_init(|| sieve(1_000_000).unwrap())
    }
}
