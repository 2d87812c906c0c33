//! Simulation core for additive arithmetic functions evaluated at harmonic
//! samples, and for the conditioned Dickman laws they converge to.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! filesystem, threads or the command line lives in `hdickman-lab`.
//!
//! Layout:
//!
//! * [`primes`]: segmented sieve and the Mertens prime sums.
//! * [`additive`]: additive functions induced by a real profile `theta`.
//! * [`harmonic`]: the harmonic law, its geometric representation and the
//!   conditioning event `prod p^eps_p <= n`.
//! * [`poissonization`]: compound-Poisson representation of the exponents.
//! * [`dickman`]: Dickman's rho, the Poisson-series limit objects and the
//!   characteristic-function quadratures.
//! * [`stats`]: ECDFs, Kolmogorov-Smirnov distances, empirical characteristic
//!   functions and mergeable accumulators.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod additive;
pub mod dickman;
mod error;
pub mod harmonic;
pub mod math;
pub mod poissonization;
pub mod primes;
pub mod quad;
pub mod rng;
pub mod stats;
mod thinning;

pub use error::{Error, Result};
pub use num_complex::Complex64;
