//! On-disk prime tables.
//!
//! Layout, all integers little-endian: the five bytes `PTBL1`, the sieve
//! limit as `u64`, the prime count as `u64`, then each prime as `u64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use hdickman_core::primes::{sieve, PrimeTable};

use crate::LabError;

pub const MAGIC: &[u8; 5] = b"PTBL1";

/// Entries up to this bound are compared with a fresh sieve on every read.
const SPOT_CHECK_LIMIT: u64 = 1 << 16;

pub fn write_table(path: &Path, table: &PrimeTable) -> Result<(), LabError> {
    let io = |e| LabError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&table.limit().to_le_bytes()).map_err(io)?;
    w.write_all(&(table.len() as u64).to_le_bytes()).map_err(io)?;
    for p in table.iter() {
        w.write_all(&p.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_table(path: &Path) -> Result<PrimeTable, LabError> {
    let bad = |message: String| LabError::Cache { path: path.display().to_string(), message };
    let mut r = BufReader::new(File::open(path).map_err(|e| LabError::io(path, e))?);
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic).map_err(|e| bad(format!("truncated header: {e}")))?;
    if &magic != MAGIC {
        return Err(bad("bad magic".into()));
    }
    let mut word = [0u8; 8];
    let mut next = |what: &str| -> Result<u64, LabError> {
        r.read_exact(&mut word).map_err(|e| bad(format!("truncated {what}: {e}")))?;
        Ok(u64::from_le_bytes(word))
    };
    let limit = next("limit")?;
    let count = next("count")?;
    // A table to 1e9 holds about 5.1e7 primes; refuse absurd counts before allocating.
    if count > limit / 2 + 1 {
        return Err(bad(format!("count {count} impossible for limit {limit}")));
    }
    let mut primes = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let p = next("prime list")?;
        primes.push(u32::try_from(p).map_err(|_| bad(format!("prime {p} does not fit in 32 bits")))?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(|e| LabError::io(path, e))? != 0 {
        return Err(bad("trailing bytes after prime list".into()));
    }
    let table = PrimeTable::from_parts(limit, primes).map_err(|e| bad(e.to_string()))?;
    // Structure is checked above; spot-check content against a small sieve.
    let head = limit.min(SPOT_CHECK_LIMIT);
    if table.up_to(head) != sieve(head)?.as_slice() {
        return Err(bad(format!("entries below {head} are not the primes")));
    }
    Ok(table)
}

/// Primes up to `limit`, read from `path` when it holds a large enough
/// table and sieved (then saved to `path`) otherwise.
pub fn load_or_sieve(path: Option<&Path>, limit: u64) -> Result<PrimeTable, LabError> {
    let Some(path) = path else {
        return Ok(sieve(limit)?);
    };
    if path.exists() {
        let table = read_table(path)?;
        if table.limit() == limit {
            return Ok(table);
        }
        if table.limit() > limit {
            return Ok(PrimeTable::from_parts(limit, table.up_to(limit).to_vec())?);
        }
    }
    let table = sieve(limit)?;
    write_table(path, &table)?;
    Ok(table)
}
