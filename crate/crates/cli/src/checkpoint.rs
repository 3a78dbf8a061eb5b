//! Binary state checkpoints.
//!
//! Layout: magic `ODROCHK1`, `n_dof` as u64 LE, `n_dof` f64 LE values, then a
//! u64 LE checksum equal to the wrapping sum of the value bytes.

use std::fs;
use std::path::Path;

use odro_core::StateVector;
use thiserror::Error;

pub const MAGIC: &[u8; 8] = b"ODROCHK1";
const HEADER: usize = 16;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint: bad magic")]
    BadMagic,

    #[error("checkpoint length mismatch: expected {expected} bytes, found {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("checkpoint checksum mismatch: stored {stored:#018x}, computed {computed:#018x}")]
    ChecksumMismatch { stored: u64, computed: u64 },

    #[error("refusing to checkpoint a non-finite state")]
    NonFinite,

    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
}

fn checksum(payload: &[u8]) -> u64 {
    payload
        .iter()
        .fold(0u64, |acc, &b| acc.wrapping_add(u64::from(b)))
}

pub fn encode(state: &StateVector) -> Result<Vec<u8>, CheckpointError> {
    if !state.is_finite() {
        return Err(CheckpointError::NonFinite);
    }
    let mut out = Vec::with_capacity(HEADER + 8 * state.n_dof() + 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(state.n_dof() as u64).to_le_bytes());
    for v in state.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let sum = checksum(&out[HEADER..]);
    out.extend_from_slice(&sum.to_le_bytes());
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<StateVector, CheckpointError> {
    if bytes.len() >= MAGIC.len() && &bytes[..MAGIC.len()] != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    if bytes.len() < HEADER + 8 {
        return Err(CheckpointError::LengthMismatch {
            expected: HEADER + 8,
            actual: bytes.len(),
        });
    }
    let n_dof = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let expected = usize::try_from(n_dof)
        .ok()
        .and_then(|n| n.checked_mul(8))
        .and_then(|b| b.checked_add(HEADER + 8))
        .unwrap_or(usize::MAX);
    if bytes.len() != expected {
        return Err(CheckpointError::LengthMismatch {
            expected,
            actual: bytes.len(),
        });
    }
    let payload = &bytes[HEADER..expected - 8];
    let stored = u64::from_le_bytes(bytes[expected - 8..].try_into().expect("8 bytes"));
    let computed = checksum(payload);
    if stored != computed {
        return Err(CheckpointError::ChecksumMismatch { stored, computed });
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(StateVector::new(values))
}

pub fn write_checkpoint(
    state: &StateVector,
    path: impl AsRef<Path>,
) -> Result<(), CheckpointError> {
    fs::write(path, encode(state)?)?;
    Ok(())
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<StateVector, CheckpointError> {
    decode(&fs::read(path)?)
}
