//! Numerical integration: globally adaptive Gauss-Kronrod (7/15 points) for
//! complex-valued integrands, and Gauss-Legendre rules of any order.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{cos, fabs, PI};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-10, rel_tol: 0.0, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Piece {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        k += pair * WGK[j];
        if j % 2 == 1 {
            g += pair * WG[j / 2];
        }
    }
    let value = k * half;
    let error = ((k - g) * half).norm();
    Piece { a, b, value, error }
}

/// Integrates a complex-valued `f` over `[a, b]`. Nodes are interior, so
/// integrable endpoint singularities are allowed.
pub fn integrate_complex<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    opts: QuadOptions,
) -> Result<QuadResult<Complex64>> {
    if a == b {
        return Ok(QuadResult { value: Complex64::new(0.0, 0.0), error: 0.0, intervals: 0 });
    }
    let mut heap = BinaryHeap::new();
    let first = kronrod(&f, a, b);
    let mut total = first.value;
    let mut err = first.error;
    heap.push(first);
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.norm());
        if err <= tol {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Numeric(alloc::format!(
                "quadrature on [{a}, {b}] stalled at error {err:e} with {} intervals",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Numeric(alloc::format!("quadrature interval underflow near {mid}")));
        }
        let left = kronrod(&f, worst.a, mid);
        let right = kronrod(&f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // re-sum to shed drift from incremental updates
    let value = heap.iter().fold(Complex64::new(0.0, 0.0), |acc, p| acc + p.value);
    let error = heap.iter().map(|p| p.error).sum();
    Ok(QuadResult { value, error, intervals: heap.len() })
}

/// Real-valued counterpart of [`integrate_complex`].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult<f64>> {
    let r = integrate_complex(|x| Complex64::new(f(x), 0.0), a, b, opts)?;
    Ok(QuadResult { value: r.value.re, error: r.error, intervals: r.intervals })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let m = order.div_ceil(2);
    for i in 0..m {
        let mut x = cos(PI * (i as f64 + 0.75) / (order as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(order, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if fabs(dx) < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(order, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Fixed Gauss-Legendre rule mapped to an interval.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        GaussRule { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let s: f64 = self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(c + h * x)).sum();
        s * h
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (c + h * x, w * h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{exp, log, sin, sqrt};

    #[test]
    fn legendre_rules_are_exact_for_polynomials() {
        for order in [1usize, 2, 4, 7, 16, 64] {
            let rule = GaussRule::new(order);
            let wsum: f64 = rule.mapped(-1.0, 1.0).map(|(_, w)| w).sum();
            assert!((wsum - 2.0).abs() < 1e-13);
            let deg = 2 * order - 1;
            let v = rule.integrate(|x| x.powi(deg as i32 - 1), 0.0, 1.0);
            assert!((v - 1.0 / deg as f64).abs() < 1e-13, "order {order}");
        }
    }

    #[test]
    fn adaptive_smooth_and_singular() {
        let r = integrate(exp, 0.0, 1.0, QuadOptions::default()).unwrap();
        assert!((r.value - (exp(1.0) - 1.0)).abs() < 1e-13);
        let r = integrate(|x| 1.0 / sqrt(x), 0.0, 1.0, QuadOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
        let r = integrate(log, 0.0, 1.0, QuadOptions::default()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-9);
        let r = integrate_complex(|x| Complex64::new(0.0, sin(x)), 0.0, PI, QuadOptions::default()).unwrap();
        assert!((r.value.im - 2.0).abs() < 1e-12 && r.value.re == 0.0);
    }

    #[test]
    fn stalls_report_numeric_error() {
        let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 0.0, max_intervals: 5 };
        assert!(matches!(integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, opts), Err(Error::Numeric(_))));
    }
}
