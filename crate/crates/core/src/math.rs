//! Floating point helpers. All transcendental functions go through `libm`
//! so results do not depend on the platform's libm.

pub use libm::{cos, exp, expm1, fabs, floor, log, log1p, pow, sin, sqrt};

pub use core::f64::consts::{E, PI};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `e^{-gamma}`, the limit of `P[A_n]` and the mass of the Dickman law on `[0, 1]`.
pub const EXP_NEG_GAMMA: f64 = 0.561_459_483_566_885_2;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub const fn new() -> Self {
        KahanSum { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if fabs(self.sum) >= fabs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl core::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn ksum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

/// `L_n = sum_{k <= n} 1/k`, summed from the small terms up.
pub fn harmonic_number(n: u64) -> f64 {
    ksum((1..=n).rev().map(|k| 1.0 / k as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((exp(-EULER_GAMMA) - EXP_NEG_GAMMA).abs() < 1e-15);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(ksum(xs.iter().copied()), 2.0);
    }

    #[test]
    fn harmonic_small() {
        assert!((harmonic_number(3) - 11.0 / 6.0).abs() < 1e-15);
        assert_eq!(harmonic_number(1), 1.0);
    }
}
