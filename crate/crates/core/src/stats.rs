//! Distribution comparison: ECDFs, Kolmogorov-Smirnov distances, empirical
//! characteristic functions, chi-square statistics and mergeable moment
//! accumulators.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::math::{cos, sin, sqrt, KahanSum};

/// 0.99 quantile of the Kolmogorov distribution: `sqrt(m) D_m` exceeds it
/// with probability about 1%.
pub const KOLMOGOROV_Q99: f64 = 1.6276;

/// Sorted sample.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Sorts `samples`; NaNs are rejected.
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.iter().any(|x| x.is_nan()) {
            return Err(domain("sample contains NaN"));
        }
        samples.sort_unstable_by(f64::total_cmp);
        Ok(EmpiricalDistribution { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Right-continuous ECDF.
    pub fn ecdf(&self, x: f64) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.partition_point(|&s| s <= x) as f64 / self.samples.len() as f64
    }

    /// `(value, ECDF(value))` at each distinct sample value.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let m = self.samples.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &x) in self.samples.iter().enumerate() {
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 = (i + 1) as f64 / m,
                _ => out.push((x, (i + 1) as f64 / m)),
            }
        }
        out
    }

    /// Merges two sorted samples. The result does not depend on the order
    /// of merging, so partial results from parallel workers can be combined
    /// in any order.
    pub fn merge(&self, other: &EmpiricalDistribution) -> EmpiricalDistribution {
        let (a, b) = (&self.samples, &other.samples);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if a[i].total_cmp(&b[j]).is_le() {
                out.push(a[i]);
                i += 1;
            } else {
                out.push(b[j]);
                j += 1;
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        EmpiricalDistribution { samples: out }
    }

    pub fn mean(&self) -> f64 {
        crate::math::ksum(self.samples.iter().copied()) / self.samples.len() as f64
    }
}

/// `sup_x |ECDF(x) - cdf(x)|` against a continuous `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(a: &EmpiricalDistribution, cdf: F) -> Result<f64> {
    if a.is_empty() {
        return Err(domain("KS statistic of an empty sample"));
    }
    let m = a.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in a.samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / m - f).max(f - i as f64 / m);
    }
    Ok(d)
}

/// KS distance to a discrete law given by its CDF at each atom (ascending).
/// Both step functions only jump at atoms, so comparing right limits at the
/// atoms also covers the left limits. Sample points off the atoms count
/// towards the next atom above them.
pub fn ks_discrete(a: &EmpiricalDistribution, atoms: &[f64], cdf_at_atoms: &[f64]) -> Result<f64> {
    if a.is_empty() {
        return Err(domain("KS statistic of an empty sample"));
    }
    if atoms.len() != cdf_at_atoms.len() {
        return Err(domain("atoms and CDF values differ in length"));
    }
    let mut d: f64 = 0.0;
    let mut below = 0.0;
    for (&x, &f) in atoms.iter().zip(cdf_at_atoms) {
        let e = a.ecdf(x);
        d = d.max((e - f).abs()).max((a.ecdf_left(x) - below).abs());
        below = f;
    }
    Ok(d)
}

impl EmpiricalDistribution {
    /// `ECDF(x-)`.
    pub fn ecdf_left(&self, x: f64) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.partition_point(|&s| s < x) as f64 / self.samples.len() as f64
    }
}

/// `sup |ECDF_a - ECDF_b|` by a merge scan.
pub fn ks_two_sample(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(domain("two-sample KS needs two nonempty samples"));
    }
    let (xs, ys) = (&a.samples, &b.samples);
    let (m, n) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = if xs[i] <= ys[j] { xs[i] } else { ys[j] };
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / m - j as f64 / n).abs());
    }
    Ok(d)
}

/// Empirical characteristic function on a grid of `u` values.
#[derive(Debug, Clone, PartialEq)]
pub struct CharFunctionGrid {
    pub u_values: Vec<f64>,
    pub values: Vec<Complex64>,
    pub count: usize,
}

impl CharFunctionGrid {
    /// `max_u |values(u) - target(u)|`.
    pub fn sup_gap<F: FnMut(f64) -> Complex64>(&self, mut target: F) -> f64 {
        self.u_values.iter().zip(&self.values).map(|(&u, &v)| (v - target(u)).norm()).fold(0.0, f64::max)
    }
}

/// `(1/m) sum_j exp(i u x_j)` for each `u` in `u_grid`.
pub fn empirical_charfn(a: &EmpiricalDistribution, u_grid: &[f64]) -> Result<CharFunctionGrid> {
    if a.is_empty() {
        return Err(domain("characteristic function of an empty sample"));
    }
    let m = a.len() as f64;
    let values = u_grid
        .iter()
        .map(|&u| {
            let (mut re, mut im) = (KahanSum::new(), KahanSum::new());
            for &x in &a.samples {
                re.add(cos(u * x));
                im.add(sin(u * x));
            }
            Complex64::new(re.value() / m, im.value() / m)
        })
        .collect();
    Ok(CharFunctionGrid { u_values: u_grid.to_vec(), values, count: a.len() })
}

/// Evenly spaced grid `lo, lo + step, ..., hi`, computed as `lo + i * step`.
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = libm::round((hi - lo) / step) as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

/// Pearson's `sum (O - E)^2 / E` for observed counts and cell probabilities.
pub fn chi_square_statistic(observed: &[u64], probabilities: &[f64]) -> Result<f64> {
    if observed.len() != probabilities.len() || observed.is_empty() {
        return Err(domain("observed counts and probabilities must be nonempty and aligned"));
    }
    if probabilities.iter().any(|&p| !(p > 0.0)) {
        return Err(domain("cell probabilities must be positive"));
    }
    let total: u64 = observed.iter().sum();
    let t = total as f64;
    Ok(observed
        .iter()
        .zip(probabilities)
        .map(|(&o, &p)| {
            let e = p * t;
            (o as f64 - e) * (o as f64 - e) / e
        })
        .sum())
}

/// Streaming mean and variance with an associative merge.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl MomentAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&self, other: &MomentAccumulator) -> MomentAccumulator {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let count = self.count + other.count;
        let (na, nb, n) = (self.count as f64, other.count as f64, count as f64);
        let d = other.mean - self.mean;
        MomentAccumulator { count, mean: self.mean + d * nb / n, m2: self.m2 + other.m2 + d * d * na * nb / n }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        sqrt(self.variance() / self.count.max(1) as f64)
    }
}

impl core::iter::FromIterator<f64> for MomentAccumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = MomentAccumulator::new();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}
