//! The named experiments.
//!
//! Each experiment fills a metric map; [`ExperimentReport::assemble`] then
//! checks the configured tolerances against it. Monte Carlo parts draw from
//! [`parallel`] streams, so metrics depend only on the config.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use hdickman_core::additive::{factorize_with_cofactor, AdditiveFunction, ThetaSpec};
use hdickman_core::dickman::{
    charfn_poisson_integral, dickman_cdf, limit_integral, solve_rho, LimitSampler, RhoTable, DEFAULT_RHO_STEP,
    DEFAULT_RHO_U_MAX,
};
use hdickman_core::harmonic::{
    enumerate_conditional_law, exact_pa, GeometricSampler, HarmonicLaw, DEFAULT_MAX_REJECTIONS,
};
use hdickman_core::math::{ksum, EXP_NEG_GAMMA};
use hdickman_core::poissonization::{exact_epsilon_pmf, geometric_pmf, level_mass, PoissonSampler, DEFAULT_K_CAP};
use hdickman_core::primes::{estimate_mertens_constant, mertens_profile, PrimeTable};
use hdickman_core::rng::{exponential, stream, unit, StreamRng};
use hdickman_core::stats::{
    empirical_charfn, ks_statistic, ks_two_sample, uniform_grid, EmpiricalDistribution, MomentAccumulator,
};
use hdickman_core::{Complex64, Error};

use crate::config::SamplerKind;
use crate::export::{self, CsvArtifact};
use crate::parallel::{collect, part_base, try_collect};
use crate::{cache, ExperimentConfig, ExperimentName, ExperimentReport, LabError};

/// A finished run: the report plus CSV tables not yet written anywhere.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: ExperimentReport,
    pub artifacts: Vec<CsvArtifact>,
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutput, LabError> {
    config.validate()?;
    let start = Instant::now();
    let mut ctx = Ctx { cfg: config, metrics: BTreeMap::new(), notes: Vec::new(), artifacts: Vec::new() };
    match config.experiment {
        ExperimentName::Mertens => mertens(&mut ctx)?,
        ExperimentName::Rho => rho(&mut ctx)?,
        ExperimentName::PaN => pa_n(&mut ctx)?,
        ExperimentName::Representation => representation(&mut ctx)?,
        ExperimentName::Poissonization => poissonization(&mut ctx)?,
        ExperimentName::LimitTheorem => limit_theorem(&mut ctx)?,
        ExperimentName::Proposition => proposition(&mut ctx)?,
        ExperimentName::Bias => bias(&mut ctx)?,
        ExperimentName::ErdosKac => erdos_kac(&mut ctx)?,
    }
    let Ctx { metrics, notes, artifacts, .. } = ctx;
    let report = ExperimentReport::assemble(config.clone(), metrics, notes, start.elapsed().as_secs_f64())?;
    Ok(RunOutput { report, artifacts })
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    metrics: BTreeMap<String, f64>,
    notes: Vec<String>,
    artifacts: Vec<CsvArtifact>,
}

impl Ctx<'_> {
    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }

    fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    fn primes(&self, limit: u64) -> Result<PrimeTable, LabError> {
        cache::load_or_sieve(self.cfg.prime_cache.as_deref().map(Path::new), limit.max(2))
    }

    fn samples(&self) -> usize {
        self.cfg.samples as usize
    }

    fn require_n(&self, min: u64, max: u64) -> Result<u64, LabError> {
        let n = self.cfg.n;
        if n < min || n > max {
            return Err(LabError::usage("n", format!("{} needs {min} <= n <= {max}", self.cfg.experiment)));
        }
        Ok(n)
    }

    fn theta(&self) -> Result<ThetaSpec, LabError> {
        let theta = self.cfg.theta_spec()?;
        if theta.degree() <= 0.0 {
            return Err(LabError::usage(
                "theta",
                "degree 0 has no finite limit functional; choose a theta with positive degree",
            ));
        }
        Ok(theta)
    }
}

fn isqrt_ceil(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r < n {
        r += 1;
    }
    r
}

fn empirical(samples: Vec<f64>) -> Result<EmpiricalDistribution, LabError> {
    Ok(EmpiricalDistribution::new(samples)?)
}

fn mertens(ctx: &mut Ctx) -> Result<(), LabError> {
    let n = ctx.require_n(20, hdickman_core::primes::MAX_SIEVE_LIMIT)?;
    let table = ctx.primes(n)?;
    let mut cutoffs: Vec<u64> = (2..=n.min(10_000)).collect();
    let mut decade = 100_000;
    while decade < n {
        cutoffs.push(decade);
        decade *= 10;
    }
    cutoffs.extend([n / 10, n]);
    cutoffs.sort_unstable();
    cutoffs.dedup();
    let profile = mertens_profile(&table, &cutoffs)?;

    let max_dev = profile.iter().map(|s| s.deviation1).fold(0.0, f64::max);
    let max_ratio = profile.iter().map(|s| s.sharp_bound_ratio()).fold(0.0, f64::max);
    let at = |m: u64| profile.iter().find(|s| s.n == m).expect("cutoff present");
    let (last, prev) = (at(n), at(n / 10));
    ctx.metric("max_abs_deviation1", max_dev);
    ctx.metric("sharp_bound_max_ratio", max_ratio);
    ctx.metric("c1_estimate", last.deviation2_centered);
    ctx.metric("c1_previous", prev.deviation2_centered);
    ctx.metric("c1_stability", (last.deviation2_centered - prev.deviation2_centered).abs());
    ctx.metric("cutoffs_tested", cutoffs.len() as f64);
    let decades: Vec<_> = profile.iter().filter(|s| s.n >= 1000 && is_decade(s.n)).copied().collect();
    if let Ok(est) = estimate_mertens_constant(&decades) {
        ctx.metric("c1_decade_spread", est.spread);
    }
    ctx.note("sharp_bound_max_ratio > 1 means |sum log p/p - log n| exceeded 2/log n somewhere; reported, not asserted");

    let mut csv = CsvArtifact::new(
        "mertens",
        &["n", "log_weighted_sum", "deviation1", "reciprocal_sum", "deviation2_centered"],
    );
    csv.rows = profile
        .iter()
        .map(|s| vec![s.n as f64, s.log_weighted_sum, s.deviation1, s.reciprocal_sum, s.deviation2_centered])
        .collect();
    ctx.artifacts.push(csv);
    Ok(())
}

fn is_decade(mut n: u64) -> bool {
    while n.is_multiple_of(10) {
        n /= 10;
    }
    n == 1
}

/// `rho(3) = 1 - log 3 + int_1^2 log s / (1 + s) ds`, with the integral by
/// composite Simpson at step `1e-5`. Shares no code with the solver.
pub fn rho3_oracle() -> f64 {
    let m = 100_000;
    let h = 1.0 / m as f64;
    let g = |s: f64| s.ln() / (1.0 + s);
    let inner = ksum((1..m).map(|i| {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        w * g(1.0 + i as f64 * h)
    }));
    let simpson = h / 3.0 * (g(1.0) + inner + g(2.0));
    1.0 - 3f64.ln() + simpson
}

fn dickman_cdf_clamped(table: &RhoTable, t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= table.grid_end() {
        1.0
    } else {
        dickman_cdf(table, t).expect("t inside the table")
    }
}

fn rho(ctx: &mut Ctx) -> Result<(), LabError> {
    let table = solve_rho(DEFAULT_RHO_U_MAX, DEFAULT_RHO_STEP)?;
    let rho2 = table.rho(2.0)?;
    let rho3 = table.rho(3.0)?;
    let oracle3 = rho3_oracle();
    ctx.metric("rho_2", rho2);
    ctx.metric("rho_2_error", (rho2 - (1.0 - 2f64.ln())).abs());
    ctx.metric("rho_3", rho3);
    ctx.metric("rho_3_oracle", oracle3);
    ctx.metric("rho_3_error", (rho3 - oracle3).abs());
    ctx.metric("max_residual", table.max_residual(1.0, DEFAULT_RHO_U_MAX));
    ctx.metric("normalizer", table.normalizer());
    ctx.metric("normalizer_gap", (table.normalizer() - EXP_NEG_GAMMA).abs());

    let sampler = LimitSampler::new(1.0, ctx.cfg.horizon)?;
    let (seed, m) = (ctx.cfg.seed, ctx.samples());
    let series = empirical(collect(m, seed, part_base(0), |rng| sampler.sample_dickman(rng)))?;
    ctx.metric("ks_series", ks_statistic(&series, |t| dickman_cdf_clamped(&table, t))?);

    let conditioned = try_collect(m, seed, part_base(1), |rng| sampler.sample_conditioned(rng, DEFAULT_MAX_REJECTIONS))?;
    let trials: u64 = conditioned.iter().map(|c| c.trials as u64).sum();
    let rate = m as f64 / trials as f64;
    ctx.metric("acceptance_rate", rate);
    ctx.metric("acceptance_gap", (rate - EXP_NEG_GAMMA).abs());
    let uniform = empirical(conditioned.into_iter().map(|c| c.value).collect())?;
    ctx.metric("ks_conditioned_uniform", ks_statistic(&uniform, |x| x.clamp(0.0, 1.0))?);

    ctx.artifacts.push(export::rho_table(&table));
    Ok(())
}

fn pa_n(ctx: &mut Ctx) -> Result<(), LabError> {
    let n = ctx.require_n(2, hdickman_core::primes::MAX_SIEVE_LIMIT)?;
    let table = ctx.primes(n.max(21))?;
    let pa = exact_pa(n, &table)?;
    let pa2 = exact_pa(2, &table)?;
    ctx.metric("exact_pa", pa);
    ctx.metric("exact_pa_2", pa2);
    ctx.metric("exact_pa_2_error", (pa2 - 0.75).abs());
    ctx.metric("exact_pa_21", exact_pa(21, &table)?);
    ctx.metric("limit_gap", (pa - EXP_NEG_GAMMA).abs());
    ctx.metric("limit_gap_times_log_n", (pa - EXP_NEG_GAMMA).abs() * (n as f64).ln());
    Ok(())
}

fn representation(ctx: &mut Ctx) -> Result<(), LabError> {
    let n = ctx.require_n(1, 2000)?;
    let table = ctx.primes(n)?;
    let (mut atom_err, mut mass_err) = (0.0f64, 0.0f64);
    for m in 1..=n {
        let law = enumerate_conditional_law(m, &table)?;
        let harmonic = HarmonicLaw::new(m)?;
        for (i, &p) in law.conditional.iter().enumerate() {
            atom_err = atom_err.max((p - harmonic.pmf(i as u64 + 1)).abs());
        }
        if m >= 2 {
            mass_err = mass_err.max((law.event_mass - exact_pa(m, &table)?).abs());
        }
    }
    ctx.metric("max_atom_error", atom_err);
    ctx.metric("max_event_mass_error", mass_err);
    Ok(())
}

fn poissonization(ctx: &mut Ctx) -> Result<(), LabError> {
    let mut tv = 0.0f64;
    for p in [2u64, 3, 5] {
        let dp = exact_epsilon_pmf(p, DEFAULT_K_CAP, 15)?;
        let d = ksum(dp.iter().enumerate().map(|(m, &q)| (q - geometric_pmf(p, m as u32)).abs())) / 2.0;
        tv = tv.max(d);
    }
    ctx.metric("max_tv", tv);
    let no_point = [2u64, 3, 5, 7, 11]
        .iter()
        .map(|&p| ((-level_mass(p, DEFAULT_K_CAP)).exp() - (1.0 - 1.0 / p as f64)).abs())
        .fold(0.0, f64::max);
    ctx.metric("no_point_error", no_point);

    let n = ctx.require_n(2, 100_000_000)?;
    let table = ctx.primes(n)?;
    let ln = (n as f64).ln();
    let weight = |g: &hdickman_core::harmonic::GeometricFactorization| {
        g.exponents().iter().map(|&(p, e)| e as f64 * (p as f64).ln() / ln).sum::<f64>()
    };
    let (seed, m) = (ctx.cfg.seed, ctx.samples());
    let pois = PoissonSampler::new(n, DEFAULT_K_CAP, &table)?;
    let geo = GeometricSampler::new(n, &table)?;
    let a = empirical(collect(m, seed, part_base(0), |rng| weight(&pois.sample(rng).reconstruct_epsilon())))?;
    let b = empirical(collect(m, seed, part_base(1), |rng| weight(&geo.sample(rng))))?;
    let grid = uniform_grid(-5.0, 5.0, 0.25);
    let ca = empirical_charfn(&a, &grid)?;
    let cb = empirical_charfn(&b, &grid)?;
    let gap = ca.values.iter().zip(&cb.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    ctx.metric("construction_cf_gap", gap);
    ctx.metric("truncation_bound", pois.truncation_bound());
    ctx.artifacts.push(export::charfn_grid("charfn", &ca, &cb.values));
    Ok(())
}

fn limit_theorem(ctx: &mut Ctx) -> Result<(), LabError> {
    let theta = ctx.theta()?;
    let alpha = theta.degree();
    let n = ctx.require_n(2, hdickman_core::primes::MAX_SIEVE_LIMIT)?;
    let f = AdditiveFunction::new(theta);
    let scale = f.theta.eval((n as f64).ln());
    let (seed, m) = (ctx.cfg.seed, ctx.samples());
    let kind = ctx.cfg.sampler.unwrap_or(if alpha == 1.0 { SamplerKind::Harmonic } else { SamplerKind::Conditioned });

    let finite = match kind {
        SamplerKind::Harmonic => {
            let table = ctx.primes(isqrt_ceil(n))?;
            let law = HarmonicLaw::new(n)?;
            let draws = try_collect(m, seed, part_base(0), |rng| {
                let k = law.sample(rng);
                factorize_with_cofactor(k, &table).map(|v| f.on_valuations(&v) / scale)
            })?;
            ctx.metric("atom_at_one", law.pmf(1));
            draws
        }
        SamplerKind::Conditioned => {
            let table = ctx.primes(n)?;
            let sampler = GeometricSampler::new(n, &table)?;
            let draws = try_collect(m, seed, part_base(0), |rng| {
                sampler.sample_conditioned(rng, DEFAULT_MAX_REJECTIONS).map(|c| (f.normalized(&c.value, n), c.trials))
            })?;
            let trials: u64 = draws.iter().map(|d| d.1 as u64).sum();
            ctx.metric("acceptance_rate", m as f64 / trials as f64);
            draws.into_iter().map(|d| d.0).collect()
        }
    };
    let limit = LimitSampler::new(alpha, ctx.cfg.horizon)?;
    let limit_draws = try_collect(m, seed, part_base(1), |rng| {
        limit.sample_conditioned(rng, DEFAULT_MAX_REJECTIONS).map(|c| c.value)
    })?;
    let finite = empirical(finite)?;
    let limit_draws = empirical(limit_draws)?;
    ctx.metric("ks_limit", ks_two_sample(&finite, &limit_draws)?);
    ctx.metric("mean_finite", finite.mean());
    ctx.metric("mean_limit", limit_draws.mean());
    if alpha == 1.0 {
        ctx.metric("ks_uniform", ks_statistic(&finite, |x| x.clamp(0.0, 1.0))?);
        ctx.note("at degree one the conditioned limit is Uniform(0,1); ks_uniform is the exact-target check");
    }
    if kind == SamplerKind::Harmonic {
        ctx.note("the finite-n law has an atom at 0 of mass 1/L_n (the draw k = 1), which bounds the uniform KS from below");
    }
    ctx.artifacts.push(export::ecdf("ecdf-finite", &finite));
    ctx.artifacts.push(export::ecdf("ecdf-limit", &limit_draws));
    Ok(())
}

type NamedFn = (&'static str, fn(f64) -> f64);

/// `(u1, u2)` pairs for the linear statistic.
pub const LINEAR_PAIRS: [(f64, f64); 3] = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];

fn pair_name(prefix: &str, (u1, u2): (f64, f64)) -> String {
    format!("{prefix}_{u1}_{u2}")
}

fn proposition(ctx: &mut Ctx) -> Result<(), LabError> {
    let theta = ctx.theta()?;
    let alpha = theta.degree();
    let n = ctx.require_n(2, hdickman_core::primes::MAX_SIEVE_LIMIT)?;
    let f = AdditiveFunction::new(theta);
    let table = ctx.primes(n)?;
    let (seed, m) = (ctx.cfg.seed, ctx.samples());

    // Unconditioned linear statistic vs the limit formula.
    let sampler = GeometricSampler::new(n, &table)?;
    let draws = collect(m, seed, part_base(0), |rng| {
        let g = sampler.sample(rng);
        LINEAR_PAIRS.map(|(u1, u2)| f.linear_statistic(&g, n, u1, u2))
    });
    let lambdas = uniform_grid(-3.0, 3.0, 0.25);
    for (i, &pair) in LINEAR_PAIRS.iter().enumerate() {
        let dist = empirical(draws.iter().map(|d| d[i]).collect())?;
        let grid = empirical_charfn(&dist, &lambdas)?;
        let target = lambdas
            .iter()
            .map(|&l| limit_integral(l * pair.0, l * pair.1, alpha, 0.0).map(|z| z.exp()))
            .collect::<Result<Vec<Complex64>, Error>>()?;
        let gap = grid.values.iter().zip(&target).map(|(v, t)| (v - t).norm()).fold(0.0, f64::max);
        ctx.metric(&pair_name("cf_gap", pair), gap);
        ctx.artifacts.push(export::charfn_grid(&pair_name("charfn", pair).replace('_', "-"), &grid, &target));
    }

    // Poisson integrals X[x] and X[x^2 + x] vs their characteristic function.
    let horizon = ctx.cfg.horizon;
    let integrals = collect(m, seed, part_base(1), |rng: &mut StreamRng| {
        let (mut a, mut b) = (0.0, 0.0);
        let mut s = exponential(rng);
        while s <= horizon {
            let x = (-s).exp();
            a += x;
            b += x * x + x;
            s += exponential(rng);
        }
        [a, b]
    });
    let us = uniform_grid(-5.0, 5.0, 0.25);
    let cases: [NamedFn; 2] = [("x", |x| x), ("x2_plus_x", |x| x * x + x)];
    for (i, (name, g)) in cases.into_iter().enumerate() {
        let dist = empirical(integrals.iter().map(|d| d[i]).collect())?;
        let grid = empirical_charfn(&dist, &us)?;
        let target = us.iter().map(|&u| charfn_poisson_integral(g, u)).collect::<Result<Vec<_>, Error>>()?;
        let gap = grid.values.iter().zip(&target).map(|(v, t)| (v - t).norm()).fold(0.0, f64::max);
        ctx.metric(&format!("poisson_cf_gap_{name}"), gap);
        ctx.artifacts.push(export::charfn_grid(&format!("poisson-charfn-{}", name.replace('_', "-")), &grid, &target));
    }

    // The limit formula against the generic Poisson-integral formula.
    let mut formula_gap = 0.0f64;
    for a in [0.5, 1.0, 2.0, alpha] {
        for &(u1, u2) in &LINEAR_PAIRS {
            for &l in &lambdas {
                let direct = limit_integral(l * u1, l * u2, a, 0.0)?.exp();
                let generic = charfn_poisson_integral(|x| l * (u1 * x.powf(a) + u2 * x), 1.0)?;
                formula_gap = formula_gap.max((direct - generic).norm());
            }
        }
    }
    ctx.metric("formula_gap", formula_gap);
    Ok(())
}

fn bias(ctx: &mut Ctx) -> Result<(), LabError> {
    let m = ctx.samples().max(2);
    let seed = ctx.cfg.seed;
    let cases: [NamedFn; 2] = [("const", |_| 1.0), ("exp", |x| (-x).exp())];
    for (i, (name, f)) in cases.into_iter().enumerate() {
        let mut rng = stream(seed, part_base(i as u64));
        let r = hdickman_core::dickman::bias_identity_check(f, m, &mut rng)?;
        ctx.metric(&format!("bias_{name}_lhs"), r.lhs);
        ctx.metric(&format!("bias_{name}_rhs"), r.rhs);
        ctx.metric(&format!("bias_{name}_stderr"), r.combined_stderr);
        ctx.metric(&format!("bias_{name}_z"), (r.lhs - r.rhs).abs() / r.combined_stderr);
        if name == "const" {
            ctx.metric("mean", r.mean);
            ctx.metric("mean_error", (r.mean - 1.0).abs());
            ctx.metric("mean_stderr", r.mean_stderr);
        }
    }
    Ok(())
}

/// Number of distinct prime factors of every `k <= n`, tallied by value.
pub fn omega_histogram(n: u64) -> Result<BTreeMap<usize, u64>, LabError> {
    let table = cache::load_or_sieve(None, isqrt_ceil(n).max(2))?;
    let mut counts = BTreeMap::new();
    for k in 1..=n {
        *counts.entry(factorize_with_cofactor(k, &table)?.len()).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

fn erdos_kac(ctx: &mut Ctx) -> Result<(), LabError> {
    let n = ctx.require_n(16, hdickman_core::primes::MAX_SIEVE_LIMIT)?;
    let table = ctx.primes(isqrt_ceil(n))?;
    let lln = (n as f64).ln().ln();
    let (seed, m) = (ctx.cfg.seed, ctx.samples());
    let z = try_collect(m, seed, part_base(0), |rng| {
        let k = (1 + (unit(rng) * n as f64) as u64).min(n);
        factorize_with_cofactor(k, &table).map(|v| (v.len() as f64 - lln) / lln.sqrt())
    })?;
    let moments: MomentAccumulator = z.iter().copied().collect();
    let dist = empirical(z)?;
    // The count is integer-valued: any continuous CDF misses each jump by at
    // least half its height.
    let mut prev = 0.0;
    let largest_atom = dist.steps().into_iter().fold(0.0f64, |acc, (_, f)| {
        let jump = f - prev;
        prev = f;
        acc.max(jump)
    });
    ctx.metric("ks_normal", ks_statistic(&dist, normal_cdf)?);
    ctx.metric("ks_discreteness_floor", largest_atom / 2.0);
    ctx.metric("mean", moments.mean());
    ctx.metric("variance", moments.variance());
    ctx.note("contrast run: the standardized count converges to the normal law only at rate 1/sqrt(log log n)");
    ctx.artifacts.push(export::ecdf("ecdf", &dist));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_up_to_ten() {
        let h = omega_histogram(10).unwrap();
        assert_eq!(h, BTreeMap::from([(0, 1), (1, 7), (2, 2)]));
    }

    #[test]
    fn rho3_oracle_value() {
        assert!((rho3_oracle() - 0.048_608_388_291_131_5).abs() < 1e-12);
    }

    #[test]
    fn normal_cdf_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-15);
    }

    #[test]
    fn pa_n_at_21() {
        let mut cfg = ExperimentConfig::default_for(ExperimentName::PaN).unwrap();
        cfg.n = 21;
        cfg.tolerances = [("exact_pa_min".to_string(), 0.5)].into();
        let out = run(&cfg).unwrap();
        assert!((out.report.metrics["exact_pa"] - 0.623_443_9).abs() < 1e-6);
        assert!(out.report.all_pass);
    }

    #[test]
    fn degree_zero_is_a_usage_error() {
        let mut cfg = ExperimentConfig::default_for(ExperimentName::LimitTheorem).unwrap();
        cfg.theta = Some("omega".into());
        assert!(matches!(run(&cfg), Err(LabError::Usage { field, .. }) if field == "theta"));
    }
}
