//! Versioned binary model file.
//!
//! Layout (all integers little-endian u32):
//!
//! ```text
//! magic "TMBK" | version | m | n | o | N | m*n*2o state bytes
//! ```
//!
//! Only the bank is stored; the inclusion index is derived state and is
//! rebuilt by [`load_model`].

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::bank::ClauseBank;
use crate::error::{Error, Result};
use crate::index::InclusionIndex;

pub const MODEL_MAGIC: u32 = u32::from_le_bytes(*b"TMBK");
pub const MODEL_VERSION: u32 = 1;

pub fn write_model<W: Write>(bank: &ClauseBank, mut w: W) -> Result<()> {
    let dims = [
        MODEL_MAGIC,
        MODEL_VERSION,
        dim(bank.classes())?,
        dim(bank.clauses())?,
        dim(bank.features())?,
        u32::from(bank.half_range()),
    ];
    for v in dims {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(bank.states())?;
    w.flush()?;
    Ok(())
}

fn dim(v: usize) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Capacity(format!("dimension {v} exceeds u32")))
}

fn read_u32<R: Read>(r: &mut R, what: &str) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Truncated(format!("model header ends before {what}")))?;
    Ok(u32::from_le_bytes(buf))
}

pub fn read_model<R: Read>(mut r: R) -> Result<ClauseBank> {
    let magic = read_u32(&mut r, "magic")?;
    if magic != MODEL_MAGIC {
        return Err(Error::BadMagic {
            expected: MODEL_MAGIC,
            found: magic,
        });
    }
    let version = read_u32(&mut r, "version")?;
    if version != MODEL_VERSION {
        return Err(Error::Version {
            expected: MODEL_VERSION,
            found: version,
        });
    }
    let m = read_u32(&mut r, "class count")? as usize;
    let n = read_u32(&mut r, "clause count")? as usize;
    let o = read_u32(&mut r, "feature count")? as usize;
    let half = read_u32(&mut r, "half-range")?;
    let half = u8::try_from(half)
        .map_err(|_| Error::Format(format!("half-range {half} does not fit a byte")))?;
    let len = m
        .checked_mul(n)
        .and_then(|v| v.checked_mul(2 * o))
        .ok_or_else(|| Error::Dimension("model dimensions overflow".into()))?;
    let mut states = vec![0u8; len];
    r.read_exact(&mut states)
        .map_err(|_| Error::Truncated(format!("expected {len} automaton states")))?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format(
            "trailing bytes after automaton states".into(),
        ));
    }
    ClauseBank::from_states(m, n, o, half, states)
}

pub fn save_model(bank: &ClauseBank, path: impl AsRef<Path>) -> Result<()> {
    write_model(bank, BufWriter::new(File::create(path)?))
}

/// Loads a bank and rebuilds its inclusion index.
pub fn load_model(path: impl AsRef<Path>) -> Result<(ClauseBank, InclusionIndex)> {
    let bank = read_model(BufReader::new(File::open(path)?))?;
    let index = InclusionIndex::build(&bank)?;
    Ok((bank, index))
}
