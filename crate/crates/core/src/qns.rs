//! The `.qns` binary state format.
//!
//! Layout: magic bytes `QNNS`, little-endian u32 version (= 1), u32
//! `n_sites`, one `normalized` flag byte, then `2^n_sites` amplitude pairs
//! of little-endian f64 `(re, im)` in basis-index order. Round-trips are
//! byte-exact.

use std::path::Path;

use num_complex::Complex64;

use crate::state::DenseState;
use crate::{write_atomic, Error, Result};

pub const MAGIC: &[u8; 4] = b"QNNS";
pub const VERSION: u32 = 1;

pub fn to_bytes(state: &DenseState) -> Vec<u8> {
    let amps = state.amplitudes();
    let mut out = Vec::with_capacity(13 + 16 * amps.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(state.n_sites() as u32).to_le_bytes());
    out.push(u8::from(state.is_normalized()));
    for a in amps {
        out.extend_from_slice(&a.re.to_le_bytes());
        out.extend_from_slice(&a.im.to_le_bytes());
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<DenseState> {
    if bytes.len() < 13 {
        return Err(Error::Format("qns data truncated before header".into()));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Format("bad magic bytes (not a qns file)".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(Error::Format(format!("unsupported qns version {version}")));
    }
    let n_sites = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    if n_sites == 0 || n_sites > 40 {
        return Err(Error::Format(format!("implausible site count {n_sites}")));
    }
    let normalized = match bytes[12] {
        0 => false,
        1 => true,
        other => return Err(Error::Format(format!("bad normalized flag {other}"))),
    };
    let count = 1usize << n_sites;
    let expected = 13 + 16 * count;
    if bytes.len() != expected {
        return Err(Error::Format(format!(
            "qns payload has {} bytes, expected {expected} for {n_sites} sites",
            bytes.len()
        )));
    }
    let mut amplitudes = Vec::with_capacity(count);
    for chunk in bytes[13..].chunks_exact(16) {
        let re = f64::from_le_bytes(chunk[0..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(chunk[8..16].try_into().expect("8 bytes"));
        amplitudes.push(Complex64::new(re, im));
    }
    let state = DenseState::new(n_sites, amplitudes)?;
    if normalized {
        let norm_sq = state.norm().powi(2);
        if (norm_sq - 1.0).abs() > 1e-10 {
            return Err(Error::Format(format!(
                "normalized flag is set but the squared norm is {norm_sq}"
            )));
        }
    }
    Ok(state.with_normalized_flag(normalized))
}

pub fn write(state: &DenseState, path: &Path) -> Result<()> {
    write_atomic(path, &to_bytes(state))
}

pub fn read(path: &Path) -> Result<DenseState> {
    from_bytes(&std::fs::read(path)?)
}
