//! Samplers against analytic laws. Bounds are 99% Kolmogorov quantiles or
//! four standard errors unless stated.

use hdickman_core::dickman::{dickman_cdf, solve_rho, LimitSampler, DEFAULT_HORIZON};
use hdickman_core::harmonic::{GeometricSampler, HarmonicLaw, DEFAULT_MAX_REJECTIONS};
use hdickman_core::math::EXP_NEG_GAMMA;
use hdickman_core::poissonization::{PoissonSampler, DEFAULT_K_CAP};
use hdickman_core::primes::sieve;
use hdickman_core::rng::stream;
use hdickman_core::stats::{
    empirical_charfn, ks_discrete, ks_statistic, uniform_grid, EmpiricalDistribution, MomentAccumulator,
    KOLMOGOROV_Q99,
};

#[test]
fn conditioned_limit_at_degree_one_is_uniform() {
    let sampler = LimitSampler::new(1.0, DEFAULT_HORIZON).unwrap();
    let mut rng = stream(11, 0);
    let m = 1_000_000;
    let mut trials = 0u64;
    let values: Vec<f64> = (0..m)
        .map(|_| {
            let c = sampler.sample_conditioned(&mut rng, DEFAULT_MAX_REJECTIONS).unwrap();
            trials += c.trials as u64;
            c.value
        })
        .collect();
    let dist = EmpiricalDistribution::new(values).unwrap();
    assert!(ks_statistic(&dist, |x| x.clamp(0.0, 1.0)).unwrap() <= 0.005);
    assert!((m as f64 / trials as f64 - EXP_NEG_GAMMA).abs() <= 0.005);
}

#[test]
fn series_draws_follow_rho_cdf() {
    let table = solve_rho(10.0, 1e-4).unwrap();
    let sampler = LimitSampler::new(1.0, DEFAULT_HORIZON).unwrap();
    let mut rng = stream(12, 0);
    let m = 200_000;
    let draws: Vec<f64> = (0..m).map(|_| sampler.sample_dickman(&mut rng)).collect();
    let moments: MomentAccumulator = draws.iter().copied().collect();
    // mean 1 and variance int_0^1 x dx = 1/2
    assert!((moments.mean() - 1.0).abs() <= 4.0 * moments.stderr());
    assert!((moments.variance() - 0.5).abs() < 0.01);
    let dist = EmpiricalDistribution::new(draws).unwrap();
    let ks = ks_statistic(&dist, |t| if t >= 10.0 { 1.0 } else { dickman_cdf(&table, t.max(0.0)).unwrap() }).unwrap();
    assert!(ks <= KOLMOGOROV_Q99 / (m as f64).sqrt(), "ks = {ks}");
}

#[test]
fn conditioned_product_is_harmonic_at_one_thousand() {
    let n = 1000;
    let table = sieve(n).unwrap();
    let sampler = GeometricSampler::new(n, &table).unwrap();
    let law = HarmonicLaw::new(n).unwrap();
    let mut rng = stream(13, 0);
    let m = 50_000;
    let draws: Vec<f64> = (0..m)
        .map(|_| sampler.sample_conditioned(&mut rng, DEFAULT_MAX_REJECTIONS).unwrap().value.product().unwrap() as f64)
        .collect();
    let atoms: Vec<f64> = (1..=n).map(|k| k as f64).collect();
    let cdf: Vec<f64> = (1..=n).map(|k| law.cdf(k)).collect();
    let ks = ks_discrete(&EmpiricalDistribution::new(draws).unwrap(), &atoms, &cdf).unwrap();
    assert!(ks <= KOLMOGOROV_Q99 / (m as f64).sqrt(), "ks = {ks}");
}

#[test]
fn poissonized_and_geometric_constructions_agree() {
    let n = 10_000;
    let table = sieve(n).unwrap();
    let ln = (n as f64).ln();
    let weight = |g: &hdickman_core::harmonic::GeometricFactorization| -> f64 {
        g.exponents().iter().map(|&(p, e)| e as f64 * (p as f64).ln() / ln).sum()
    };
    let pois = PoissonSampler::new(n, DEFAULT_K_CAP, &table).unwrap();
    let geo = GeometricSampler::new(n, &table).unwrap();
    let (mut r1, mut r2) = (stream(14, 0), stream(14, 1));
    let m = 100_000;
    let a: Vec<f64> = (0..m).map(|_| weight(&pois.sample(&mut r1).reconstruct_epsilon())).collect();
    let b: Vec<f64> = (0..m).map(|_| weight(&geo.sample(&mut r2))).collect();
    let grid = uniform_grid(-5.0, 5.0, 0.25);
    let ca = empirical_charfn(&EmpiricalDistribution::new(a).unwrap(), &grid).unwrap();
    let cb = empirical_charfn(&EmpiricalDistribution::new(b).unwrap(), &grid).unwrap();
    let gap = ca.values.iter().zip(&cb.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    assert!(gap <= 0.01, "gap = {gap}");
}
