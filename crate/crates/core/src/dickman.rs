//! The limit side: Dickman's function, the Dickman law and Poisson integrals
//! against the point process with intensity `1{0 < x <= 1} dx / x`.
//!
//! Points of that process are realized exactly as `x_i = exp(-s_i)` where
//! `s_i` are the arrival times of a unit-rate Poisson process, so an
//! integral `sum f(x_i)` is truncated only in the arrival horizon `T`.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::RngCore;

use crate::error::{domain, Error, Result};
use crate::harmonic::Conditioned;
use crate::math::{exp, floor, pow};
use crate::quad::{integrate_complex, GaussRule, QuadOptions};
use crate::rng::exponential;

/// Default arrival horizon; the neglected part of `sum x_i` is about `e^-40`.
pub const DEFAULT_HORIZON: f64 = 40.0;
/// Horizons below this are flagged on every [`LimitPair`].
pub const MIN_HORIZON: f64 = 30.0;
pub const DEFAULT_RHO_STEP: f64 = 1e-4;
pub const DEFAULT_RHO_U_MAX: f64 = 10.0;
/// Coarsest step accepted by [`solve_rho`].
pub const MAX_RHO_STEP: f64 = 1e-3;

// Lagrange stencil width for interpolating rho between grid points.
const STENCIL: usize = 6;

/// Dickman's function on an equispaced grid over `[0, u_max]`, with the
/// running integral `int_0^u rho`.
#[derive(Debug, Clone)]
pub struct RhoTable {
    u_max: f64,
    step: f64,
    per_unit: usize,
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

/// Solves `u rho'(u) = -rho(u - 1)`, `rho = 1` on `[0, 1]`, using the
/// integrated form `rho(u) = rho(k) - int_k^u rho(t - 1) / t dt`.
///
/// Each grid step is integrated with 4-point Gauss-Legendre; `rho(t - 1)`
/// at the Gauss nodes comes from 6-point Lagrange interpolation inside the
/// unit interval holding `t - 1`, where `rho` is smooth. `1 / step` must be
/// an integer so the integers fall on grid points.
pub fn solve_rho(u_max: f64, step: f64) -> Result<RhoTable> {
    if !(u_max >= 1.0) || !u_max.is_finite() || u_max > 1e3 {
        return Err(domain("u_max must lie in [1, 1000]"));
    }
    if !(step > 0.0) || step > MAX_RHO_STEP {
        return Err(Error::Config(alloc::format!(
            "rho step {step} is too coarse for 1e-8 accuracy (max {MAX_RHO_STEP})"
        )));
    }
    let per_unit = libm::round(1.0 / step) as usize;
    if (per_unit as f64 * step - 1.0).abs() > 1e-9 {
        return Err(Error::Config(alloc::format!("1 / step must be an integer, got {}", 1.0 / step)));
    }
    let h = 1.0 / per_unit as f64;
    let last = libm::ceil(u_max * per_unit as f64 - 1e-9) as usize;
    let rule = GaussRule::new(4);

    let mut values = alloc::vec![1.0; per_unit + 1];
    values.reserve(last.saturating_sub(per_unit));
    for j in per_unit..last {
        let u0 = j as f64 * h;
        let integral = rule.integrate(|t| interpolate(&values, per_unit, t - 1.0) / t, u0, u0 + h);
        let next = values[j] - integral;
        values.push(next);
    }

    let mut cumulative = Vec::with_capacity(values.len());
    cumulative.push(0.0);
    let mut acc = crate::math::KahanSum::new();
    for j in 0..last {
        let u0 = j as f64 * h;
        acc.add(if j < per_unit { h } else { rule.integrate(|t| interpolate(&values, per_unit, t), u0, u0 + h) });
        cumulative.push(acc.value());
    }
    Ok(RhoTable { u_max, step: h, per_unit, values, cumulative })
}

// rho(x) for x inside the solved grid, interpolating within the unit
// interval [floor(x), floor(x) + 1] only.
fn interpolate(values: &[f64], per_unit: usize, x: f64) -> f64 {
    if x <= 1.0 {
        return if x < 0.0 { 0.0 } else { 1.0 };
    }
    let h = 1.0 / per_unit as f64;
    let pos = x * per_unit as f64;
    let unit = floor(x) as usize;
    let (lo_bound, hi_bound) = (unit * per_unit, ((unit + 1) * per_unit).min(values.len() - 1));
    let base = floor(pos) as usize;
    let mut start = base.saturating_sub(STENCIL / 2 - 1).max(lo_bound);
    if start + STENCIL - 1 > hi_bound {
        start = hi_bound.saturating_sub(STENCIL - 1).max(lo_bound);
    }
    let end = (start + STENCIL - 1).min(hi_bound);
    let mut sum = 0.0;
    for i in start..=end {
        let xi = i as f64 * h;
        let mut w = 1.0;
        for k in start..=end {
            if k != i {
                let xk = k as f64 * h;
                w *= (x - xk) / (xi - xk);
            }
        }
        sum += w * values[i];
    }
    sum
}

impl RhoTable {
    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Largest `u` covered by the grid (`>= u_max`).
    pub fn grid_end(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    /// `(u, rho(u))` grid points.
    pub fn grid(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(move |(j, &v)| (j as f64 * self.step, v))
    }

    /// `rho(u)`; zero for negative `u`.
    pub fn rho(&self, u: f64) -> Result<f64> {
        if u > self.grid_end() + 1e-12 {
            return Err(domain(alloc::format!("u = {u} is beyond the rho table ({})", self.grid_end())));
        }
        Ok(interpolate(&self.values, self.per_unit, u.min(self.grid_end())))
    }

    /// `int_0^t rho`.
    pub fn integral(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        if t > self.grid_end() + 1e-12 {
            return Err(domain(alloc::format!("t = {t} is beyond the rho table ({})", self.grid_end())));
        }
        let t = t.min(self.grid_end());
        let j = (floor(t / self.step) as usize).min(self.values.len() - 1);
        let u0 = j as f64 * self.step;
        if t <= u0 {
            return Ok(self.cumulative[j]);
        }
        let rule = GaussRule::new(4);
        Ok(self.cumulative[j] + rule.integrate(|x| interpolate(&self.values, self.per_unit, x), u0, t))
    }

    /// `1 / int_0^{grid end} rho`; approximately `e^{-gamma}`.
    pub fn normalizer(&self) -> f64 {
        1.0 / self.cumulative[self.cumulative.len() - 1]
    }

    /// `|m rho'(m) + rho(m - 1)|` at the grid midpoint `m` of step `j`, with
    /// `rho'` from the central difference of the neighbouring grid values.
    pub fn midpoint_residual(&self, j: usize) -> f64 {
        let m = (j as f64 + 0.5) * self.step;
        let d = (self.values[j + 1] - self.values[j]) / self.step;
        (m * d + interpolate(&self.values, self.per_unit, m - 1.0)).abs()
    }

    /// Largest midpoint residual over grid steps inside `[lo, hi]`.
    pub fn max_residual(&self, lo: f64, hi: f64) -> f64 {
        let first = libm::ceil(lo.max(1.0) / self.step) as usize;
        let last = ((floor(hi / self.step) as usize).min(self.values.len() - 1)).max(first);
        (first..last).map(|j| self.midpoint_residual(j)).fold(0.0, f64::max)
    }
}

/// CDF of the Dickman law, whose density is `rho` normalized by the table's
/// own integral.
pub fn dickman_cdf(table: &RhoTable, t: f64) -> Result<f64> {
    Ok((table.integral(t)? * table.normalizer()).min(1.0))
}

/// Arrival times of a unit-rate Poisson process on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonArrivalSeries {
    pub horizon: f64,
    pub arrivals: Vec<f64>,
}

impl PoissonArrivalSeries {
    /// Cumulative sums of `gaps`, keeping those `<= horizon`.
    pub fn from_gaps(gaps: &[f64], horizon: f64) -> Self {
        let mut s = 0.0;
        let arrivals = gaps
            .iter()
            .map(|g| {
                s += g;
                s
            })
            .take_while(|&s| s <= horizon)
            .collect();
        PoissonArrivalSeries { horizon, arrivals }
    }
}

/// Exponential(1) gaps accumulated until they pass `horizon`.
pub fn sample_arrivals<R: RngCore + ?Sized>(horizon: f64, rng: &mut R) -> Result<PoissonArrivalSeries> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(domain("horizon must be a positive finite real"));
    }
    let mut arrivals = Vec::new();
    let mut s = exponential(rng);
    while s <= horizon {
        arrivals.push(s);
        s += exponential(rng);
    }
    Ok(PoissonArrivalSeries { horizon, arrivals })
}

/// `(int x^alpha d eta, int x d eta)` realized from one arrival series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitPair {
    pub value_alpha: f64,
    pub value_one: f64,
    /// Expected size of the neglected terms: `max(e^-T, e^{-alpha T} / alpha)`.
    pub truncation_tail_bound: f64,
    /// Set when the horizon is below [`MIN_HORIZON`].
    pub short_horizon: bool,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(domain(alloc::format!(
            "alpha = {alpha}: the limit functional needs alpha > 0 (int x^0 d eta diverges, the intensity has infinite mass)"
        )))
    }
}

fn tail_bound(alpha: f64, horizon: f64) -> f64 {
    exp(-horizon).max(exp(-alpha * horizon) / alpha)
}

#[inline]
fn power_of_point(x: f64, s: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        x
    } else if alpha == 2.0 {
        x * x
    } else {
        exp(-alpha * s)
    }
}

pub fn limit_pair(series: &PoissonArrivalSeries, alpha: f64) -> Result<LimitPair> {
    check_alpha(alpha)?;
    let (mut one, mut pw) = (0.0, 0.0);
    for &s in &series.arrivals {
        let x = exp(-s);
        one += x;
        pw += power_of_point(x, s, alpha);
    }
    Ok(LimitPair {
        value_alpha: pw,
        value_one: one,
        truncation_tail_bound: tail_bound(alpha, series.horizon),
        short_horizon: series.horizon < MIN_HORIZON,
    })
}

/// Draws of the limit pair without materializing the arrival series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitSampler {
    alpha: f64,
    horizon: f64,
}

impl LimitSampler {
    pub fn new(alpha: f64, horizon: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(domain("horizon must be a positive finite real"));
        }
        Ok(LimitSampler { alpha, horizon })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sample_pair<R: RngCore + ?Sized>(&self, rng: &mut R) -> LimitPair {
        let (mut one, mut pw) = (0.0, 0.0);
        let mut s = exponential(rng);
        while s <= self.horizon {
            let x = exp(-s);
            one += x;
            pw += power_of_point(x, s, self.alpha);
            s += exponential(rng);
        }
        LimitPair {
            value_alpha: pw,
            value_one: one,
            truncation_tail_bound: tail_bound(self.alpha, self.horizon),
            short_horizon: self.horizon < MIN_HORIZON,
        }
    }

    /// A Dickman-distributed draw (`int x d eta`).
    pub fn sample_dickman<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut one = 0.0;
        let mut s = exponential(rng);
        while s <= self.horizon {
            one += exp(-s);
            s += exponential(rng);
        }
        one
    }

    // One attempt; abandons the series as soon as `int x d eta` passes 1.
    fn attempt<R: RngCore + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        let (mut one, mut pw) = (0.0, 0.0);
        let mut s = exponential(rng);
        while s <= self.horizon {
            let x = exp(-s);
            one += x;
            if one > 1.0 {
                return None;
            }
            pw += power_of_point(x, s, self.alpha);
            s += exponential(rng);
        }
        Some(pw)
    }

    /// `int x^alpha d eta` conditioned on `int x d eta <= 1`, by rejection.
    pub fn sample_conditioned<R: RngCore + ?Sized>(&self, rng: &mut R, max_rejections: u32) -> Result<Conditioned<f64>> {
        for trials in 1..=max_rejections.max(1) {
            if let Some(v) = self.attempt(rng) {
                return Ok(Conditioned { value: v, trials });
            }
        }
        Err(Error::RejectionBudget { attempts: max_rejections.max(1) })
    }
}

/// One draw from the conditioned limit law at the default horizon.
pub fn sample_conditioned_limit<R: RngCore + ?Sized>(
    alpha: f64,
    rng: &mut R,
    max_rejections: u32,
) -> Result<Conditioned<f64>> {
    LimitSampler::new(alpha, DEFAULT_HORIZON)?.sample_conditioned(rng, max_rejections)
}

fn exponent_options() -> QuadOptions {
    QuadOptions { abs_tol: 1e-10, rel_tol: 0.0, max_intervals: 20_000 }
}

/// `int_0^1 (e^{i u f(x)} - 1) / x dx`, the log-characteristic function of
/// the Poisson integral `X[f]`. `f` must satisfy `int_0^1 |f| / x < inf`.
pub fn poisson_integral_exponent<F: Fn(f64) -> f64>(f: F, u: f64) -> Result<Complex64> {
    if u == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let r = integrate_complex(
        |x| {
            let phase = u * f(x);
            Complex64::new(libm::cos(phase) - 1.0, libm::sin(phase)) / x
        },
        0.0,
        1.0,
        exponent_options(),
    )?;
    Ok(r.value)
}

/// `E[exp(i u X[f])] = exp(int_0^1 (e^{i u f(x)} - 1) / x dx)`.
pub fn charfn_poisson_integral<F: Fn(f64) -> f64>(f: F, u: f64) -> Result<Complex64> {
    if u == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    Ok(poisson_integral_exponent(f, u)?.exp())
}

/// `int_{u_lower}^1 (exp(i (v1 u^alpha + v2 u)) - 1) / u du`.
///
/// For `alpha < 1` the variable `w = u^alpha` removes the `u^{alpha - 1}`
/// endpoint behaviour.
pub fn limit_integral(v1: f64, v2: f64, alpha: f64, u_lower: f64) -> Result<Complex64> {
    check_alpha(alpha)?;
    if !(0.0..1.0).contains(&u_lower) {
        return Err(domain("u_lower must lie in [0, 1)"));
    }
    let opts = exponent_options();
    let phase_term = |phase: f64| Complex64::new(libm::cos(phase) - 1.0, libm::sin(phase));
    let r = if alpha >= 1.0 {
        integrate_complex(|u| phase_term(v1 * pow(u, alpha) + v2 * u) / u, u_lower, 1.0, opts)?
    } else {
        let inv = 1.0 / alpha;
        integrate_complex(
            |w| phase_term(v1 * w + v2 * pow(w, inv)) / (alpha * w),
            pow(u_lower, alpha),
            1.0,
            opts,
        )?
    };
    Ok(r.value)
}

/// Monte Carlo estimates of both sides of `E[D f(D)] = int_0^1 E[f(D + t)] dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasReport {
    pub lhs: f64,
    pub rhs: f64,
    pub lhs_stderr: f64,
    pub rhs_stderr: f64,
    /// `sqrt(lhs_stderr^2 + rhs_stderr^2)`; the two sides use independent draws.
    pub combined_stderr: f64,
    /// Sample mean of the draws used for the left side.
    pub mean: f64,
    pub mean_stderr: f64,
}

fn mean_and_stderr(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut n, mut mean, mut m2) = (0.0f64, 0.0f64, 0.0f64);
    for x in xs {
        n += 1.0;
        let d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    let var = if n > 1.0 { m2 / (n - 1.0) } else { 0.0 };
    (mean, libm::sqrt(var / n.max(1.0)))
}

/// Checks the size-bias identity of the Dickman law for a bounded smooth `f`.
/// The inner `dt` integral uses a 64-point Gauss-Legendre rule.
pub fn bias_identity_check<F: Fn(f64) -> f64, R: RngCore + ?Sized>(
    f: F,
    samples: usize,
    rng: &mut R,
) -> Result<BiasReport> {
    if samples < 2 {
        return Err(domain("need at least two samples"));
    }
    let sampler = LimitSampler::new(1.0, DEFAULT_HORIZON)?;
    let left: Vec<f64> = (0..samples).map(|_| sampler.sample_dickman(rng)).collect();
    let rule = GaussRule::new(64);
    let (lhs, lhs_stderr) = mean_and_stderr(left.iter().map(|&d| d * f(d)));
    let (mean, mean_stderr) = mean_and_stderr(left.iter().copied());
    let (rhs, rhs_stderr) = mean_and_stderr((0..samples).map(|_| {
        let d = sampler.sample_dickman(rng);
        rule.integrate(|t| f(d + t), 0.0, 1.0)
    }));
    Ok(BiasReport {
        lhs,
        rhs,
        lhs_stderr,
        rhs_stderr,
        combined_stderr: libm::sqrt(lhs_stderr * lhs_stderr + rhs_stderr * rhs_stderr),
        mean,
        mean_stderr,
    })
}
