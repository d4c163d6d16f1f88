//! Exact desk-scale engine for neural-network quantum states.
//!
//! Builds dense wavefunctions from local quasi-product covers, restricted
//! and deep Boltzmann machines, and complex feed-forward networks, then
//! measures bipartite Rényi entanglement against lattice-boundary rank
//! bounds. Everything is computed exactly on the full `2^N` amplitude
//! vector, so system sizes are capped (22 sites by default) and every
//! quantity can be cross-checked against brute-force oracles.

pub mod analysis;
pub mod cli;
pub mod geometry;
pub mod image;
pub mod neural;
pub mod qns;
pub mod quasi_product;
pub mod spec_file;
pub mod state;

use std::path::Path;

use thiserror::Error;

/// Default cap on dense-state size: 2^22 amplitudes is 64 MiB of f64 pairs.
pub const DEFAULT_MAX_SITES: usize = 22;

/// Default cap on the deep-layer width of a DBM; the deep sum is brute force.
pub const DEFAULT_MAX_DEEP: usize = 20;

/// Relative cutoff below which singular values do not count toward the rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed arguments or data (bad site ids, mismatched sizes, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// A spec or geometry is internally inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// The request exceeds a dense-scale limit.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// A state with zero norm (or an empty target set) was produced.
    #[error("degenerate state: {0}")]
    Degenerate(String),

    /// An operation's precondition does not hold (e.g. unnormalized input).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A serialized artifact failed to parse or validate.
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Writes `bytes` to `path` via a temp file in the same directory plus an
/// atomic rename, so failed runs never leave partial output files.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Formats a float with 12 significant digits, the project-wide convention
/// for report output (stable digits make regression diffs meaningful).
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let s = format!("{x:.11e}");
    match s.split_once('e') {
        Some((mantissa, exp)) if exp.parse::<i32>() == Ok(0) => mantissa.to_string(),
        _ => s,
    }
}
