// Sparse Bernoulli selection over a prime list.
//
// Each prime p is selected independently with probability q(p) <= 1/p.
// Primes are grouped into dyadic blocks [2^j, 2^(j+1)); inside a block every
// prime is a candidate with probability 2^-j, candidates are reached by
// geometric skips, and a candidate is kept with probability q(p) * 2^j.
// Expected work per pass is O(log log n) instead of O(pi(n)).

use alloc::vec::Vec;
use core::ops::ControlFlow;

use rand::RngCore;

use crate::math::{floor, log, log1p};
use crate::rng::{open_unit, unit};

#[derive(Debug, Clone)]
pub(crate) struct DyadicBlocks {
    // (start index, end index, candidate probability)
    blocks: Vec<(usize, usize, f64)>,
}

impl DyadicBlocks {
    pub(crate) fn new(primes: &[u32]) -> Self {
        let mut blocks = Vec::new();
        let mut start = 0usize;
        let mut j = 1u32;
        while start < primes.len() {
            let upper = 1u64 << (j + 1);
            let end = start + primes[start..].partition_point(|&p| (p as u64) < upper);
            if end > start {
                blocks.push((start, end, 1.0 / (1u64 << j) as f64));
            }
            start = end;
            j += 1;
        }
        DyadicBlocks { blocks }
    }

    /// Calls `visit(p)` for every selected prime in ascending order; `visit`
    /// may stop the walk early.
    pub(crate) fn walk<R, Q, V>(&self, primes: &[u32], rng: &mut R, q: Q, mut visit: V) -> ControlFlow<()>
    where
        R: RngCore + ?Sized,
        Q: Fn(u64) -> f64,
        V: FnMut(u64, &mut R) -> ControlFlow<()>,
    {
        for &(start, end, bound) in &self.blocks {
            let log_miss = log1p(-bound);
            let mut i = start;
            loop {
                let skip = floor(log(open_unit(rng)) / log_miss);
                if skip >= (end - i) as f64 {
                    break;
                }
                i += skip as usize;
                let p = primes[i] as u64;
                let keep = q(p) / bound;
                debug_assert!(keep <= 1.0 + 1e-12);
                if unit(rng) < keep {
                    visit(p, rng)?;
                }
                i += 1;
                if i >= end {
                    break;
                }
            }
        }
        ControlFlow::Continue(())
    }
}
