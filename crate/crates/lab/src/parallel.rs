//! Deterministic parallel Monte Carlo.
//!
//! Work is cut into fixed-size chunks; chunk `i` always draws from stream
//! `base + i` of the run seed and results are concatenated in chunk order.
//! The output is therefore the same for any number of worker threads.

use hdickman_core::rng::{stream, StreamRng};
use rayon::prelude::*;

/// Samples per chunk.
pub const CHUNK: usize = 8192;

/// Stream-id base for part `part` of an experiment; parts never share streams.
pub fn part_base(part: u64) -> u64 {
    part << 40
}

/// Runs `draw` for `total` samples, `CHUNK` at a time, in parallel.
pub fn collect<T, F>(total: usize, seed: u64, base: u64, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng) -> T + Sync,
{
    try_collect(total, seed, base, |rng| Ok::<T, std::convert::Infallible>(draw(rng)))
        .unwrap_or_else(|e| match e {})
}

/// Fallible variant of [`collect`]; the first error in chunk order wins.
pub fn try_collect<T, E, F>(total: usize, seed: u64, base: u64, draw: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(&mut StreamRng) -> Result<T, E> + Sync,
{
    let chunks = total.div_ceil(CHUNK);
    let parts: Vec<Result<Vec<T>, E>> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, base + i as u64);
            let len = CHUNK.min(total - i * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(total);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}
