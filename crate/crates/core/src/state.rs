//! Dense wavefunctions, basis configurations, Schmidt spectra and Rényi
//! entropies.
//!
//! Conventions fixed project-wide:
//! - basis index of a configuration is `sum_i bit_i 2^i` with site 0 least
//!   significant;
//! - bit 0 maps to value 0 (`ZeroOne`) or spin +1 (`PlusMinus`);
//! - entropies are returned in nats, with a bits helper.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, DEFAULT_RANK_TOL};

/// How packed bits map to the degrees of freedom a formula sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alphabet {
    /// bit b -> b (images, {0,1} hidden units).
    ZeroOne,
    /// bit b -> 1 - 2b, so bit 0 is spin +1.
    PlusMinus,
}

impl Alphabet {
    #[inline]
    pub fn value(self, bit: u8) -> f64 {
        match self {
            Alphabet::ZeroOne => f64::from(bit),
            Alphabet::PlusMinus => 1.0 - 2.0 * f64::from(bit),
        }
    }
}

/// One basis assignment of `n_sites` binary sites, bit-packed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinConfiguration {
    n_sites: usize,
    bits: u64,
    alphabet: Alphabet,
}

impl SpinConfiguration {
    pub fn from_index(n_sites: usize, index: u64, alphabet: Alphabet) -> Result<Self> {
        if n_sites > 63 {
            return Err(Error::Resource(format!(
                "{n_sites} sites exceed the 63-bit packing"
            )));
        }
        if index >> n_sites != 0 {
            return Err(Error::Input(format!(
                "index {index} out of range for {n_sites} sites"
            )));
        }
        Ok(Self {
            n_sites,
            bits: index,
            alphabet,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    /// Basis index: `sum_i bit_i 2^i`, site 0 least significant.
    pub fn index(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn bit(&self, site: usize) -> u8 {
        debug_assert!(site < self.n_sites);
        ((self.bits >> site) & 1) as u8
    }

    /// Value of a site under this configuration's alphabet.
    #[inline]
    pub fn value(&self, site: usize) -> f64 {
        self.alphabet.value(self.bit(site))
    }

    pub fn with_bit_flipped(&self, site: usize) -> Self {
        debug_assert!(site < self.n_sites);
        Self {
            bits: self.bits ^ (1 << site),
            ..*self
        }
    }
}

/// Full complex amplitude vector over all `2^n` configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    n_sites: usize,
    amplitudes: Vec<Complex64>,
    normalized: bool,
}

impl DenseState {
    pub fn new(n_sites: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let expect = 1usize
            .checked_shl(n_sites as u32)
            .filter(|_| n_sites < usize::BITS as usize)
            .ok_or_else(|| Error::Resource(format!("2^{n_sites} amplitudes do not fit")))?;
        if amplitudes.len() != expect {
            return Err(Error::Input(format!(
                "amplitude vector has length {} but {n_sites} sites need {expect}",
                amplitudes.len()
            )));
        }
        Ok(Self {
            n_sites,
            amplitudes,
            normalized: false,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: u64) -> Complex64 {
        self.amplitudes[index as usize]
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub(crate) fn with_normalized_flag(mut self, flag: bool) -> Self {
        self.normalized = flag;
        self
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Returns the unit-norm copy of this state.
    pub fn normalize(&self) -> Result<DenseState> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Degenerate(format!(
                "cannot normalize state with norm {norm}"
            )));
        }
        let amplitudes = self.amplitudes.iter().map(|a| a / norm).collect();
        Ok(DenseState {
            n_sites: self.n_sites,
            amplitudes,
            normalized: true,
        })
    }

    /// `<self|other>` with the conjugate on `self`.
    pub fn inner(&self, other: &DenseState) -> Result<Complex64> {
        if self.n_sites != other.n_sites {
            return Err(Error::Input(format!(
                "site-count mismatch: {} vs {}",
                self.n_sites, other.n_sites
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Applies a Pauli string, at most one operator per site.
    ///
    /// Z acts as the phase `(-1)^bit`, X flips the bit, and `Y = iXZ`.
    pub fn apply_pauli_string(&self, ops: &[(usize, Pauli)]) -> Result<DenseState> {
        let mut seen = BTreeSet::new();
        let mut flip_mask = 0u64;
        let mut phase_mask = 0u64;
        let mut y_count = 0u32;
        for &(site, op) in ops {
            if site >= self.n_sites {
                return Err(Error::Input(format!("site {site} out of range")));
            }
            if !seen.insert(site) {
                return Err(Error::Input(format!(
                    "duplicate site {site} in Pauli string"
                )));
            }
            match op {
                Pauli::X => flip_mask |= 1 << site,
                Pauli::Z => phase_mask |= 1 << site,
                Pauli::Y => {
                    flip_mask |= 1 << site;
                    phase_mask |= 1 << site;
                    y_count += 1;
                }
            }
        }
        let unit = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ][(y_count % 4) as usize];
        let amplitudes: Vec<Complex64> = (0..self.amplitudes.len() as u64)
            .map(|i| {
                let src = i ^ flip_mask;
                let sign = if (src & phase_mask).count_ones() & 1 == 0 {
                    1.0
                } else {
                    -1.0
                };
                unit * sign * self.amplitudes[src as usize]
            })
            .collect();
        Ok(DenseState {
            n_sites: self.n_sites,
            amplitudes,
            normalized: self.normalized,
        })
    }

    /// Schmidt spectrum across a bipartition.
    ///
    /// The amplitude vector is reshaped into a `2^|A| x 2^|A^c|` matrix
    /// (rows indexed by region-A bits in ascending site order) and its
    /// singular values are returned in non-increasing order.
    pub fn schmidt(&self, part: &Bipartition) -> Result<SchmidtSpectrum> {
        if part.n_sites() != self.n_sites {
            return Err(Error::Input(format!(
                "bipartition is over {} sites, state has {}",
                part.n_sites(),
                self.n_sites
            )));
        }
        if !self.normalized {
            return Err(Error::Precondition(
                "schmidt requires a normalized state; call normalize() first".into(),
            ));
        }
        let a_sites = part.region_a();
        let b_sites = part.complement();
        let rows = 1usize << a_sites.len();
        let cols = 1usize << b_sites.len();
        let mut matrix = DMatrix::<Complex64>::zeros(rows, cols);
        for (idx, amp) in self.amplitudes.iter().enumerate() {
            let mut r = 0usize;
            for (t, &s) in a_sites.iter().enumerate() {
                r |= ((idx >> s) & 1) << t;
            }
            let mut c = 0usize;
            for (t, &s) in b_sites.iter().enumerate() {
                c |= ((idx >> s) & 1) << t;
            }
            matrix[(r, c)] = *amp;
        }
        let svd = matrix
            .try_svd(false, false, f64::EPSILON, 0)
            .ok_or_else(|| Error::Precondition("SVD did not converge".into()))?;
        SchmidtSpectrum::new(svd.singular_values.iter().copied().collect())
    }
}

/// Materializes `amp` over all `2^n` configurations (normalized flag unset).
///
/// The amplitude function must be pure; evaluation order is unspecified and
/// may be parallel.
pub fn evaluate_all<F>(
    n_sites: usize,
    alphabet: Alphabet,
    max_sites: usize,
    amp: F,
) -> Result<DenseState>
where
    F: Fn(&SpinConfiguration) -> Complex64 + Sync,
{
    check_site_budget(n_sites, max_sites)?;
    let len = 1usize << n_sites;
    let amplitudes: Vec<Complex64> = (0..len)
        .into_par_iter()
        .with_min_len(1024)
        .map(|i| {
            let cfg = SpinConfiguration {
                n_sites,
                bits: i as u64,
                alphabet,
            };
            amp(&cfg)
        })
        .collect();
    DenseState::new(n_sites, amplitudes)
}

/// Fails with a resource error (including a memory estimate) when a dense
/// state over `n_sites` would exceed the configured cap.
pub fn check_site_budget(n_sites: usize, max_sites: usize) -> Result<()> {
    if n_sites == 0 {
        return Err(Error::Input("state needs at least one site".into()));
    }
    if n_sites > max_sites {
        let mib = if n_sites < 58 {
            (16u64 << n_sites) / (1 << 20)
        } else {
            u64::MAX
        };
        return Err(Error::Resource(format!(
            "{n_sites} sites exceed the dense-state cap of {max_sites} \
             (2^{n_sites} amplitudes would need ~{mib} MiB); \
             raise QNNENT_MAX_SITES to override"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// A bipartition `S = A ⊔ A^c`; region A must be a nonempty proper subset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    n_sites: usize,
    region_a: Vec<usize>,
}

impl Bipartition {
    pub fn new(n_sites: usize, region: impl IntoIterator<Item = usize>) -> Result<Self> {
        let set: BTreeSet<usize> = region.into_iter().collect();
        if let Some(&bad) = set.iter().find(|&&s| s >= n_sites) {
            return Err(Error::Input(format!(
                "region site {bad} out of range 0..{n_sites}"
            )));
        }
        if set.is_empty() {
            return Err(Error::Input("region A must be nonempty".into()));
        }
        if set.len() == n_sites {
            return Err(Error::Input("region A must be a proper subset".into()));
        }
        Ok(Self {
            n_sites,
            region_a: set.into_iter().collect(),
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Sorted sites of region A.
    pub fn region_a(&self) -> &[usize] {
        &self.region_a
    }

    pub fn contains(&self, site: usize) -> bool {
        self.region_a.binary_search(&site).is_ok()
    }

    /// Sorted sites of the complement A^c.
    pub fn complement(&self) -> Vec<usize> {
        (0..self.n_sites).filter(|s| !self.contains(*s)).collect()
    }

    pub fn complement_part(&self) -> Bipartition {
        Bipartition {
            n_sites: self.n_sites,
            region_a: self.complement(),
        }
    }
}

/// Non-increasing singular values of a reshaped amplitude matrix. The
/// squared values are the eigenvalues of the reduced density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    values: Vec<f64>,
}

impl SchmidtSpectrum {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Input(
                "singular values must be finite and non-negative".into(),
            ));
        }
        values.sort_by(|a, b| b.partial_cmp(a).expect("finite values"));
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Rényi entropy in nats.
    ///
    /// For `alpha != 1` this is `ln(sum_i p_i^alpha) / (1 - alpha)` with
    /// `p_i` the squared singular values; `alpha == 1` takes the explicit
    /// von Neumann branch `-sum p ln p` (with `0 ln 0 := 0`), not a
    /// numerical limit.
    pub fn renyi_entropy(&self, alpha: f64) -> Result<f64> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::Input(format!("alpha must be positive, got {alpha}")));
        }
        let total: f64 = self.values.iter().map(|v| v * v).sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::Precondition(format!(
                "spectrum is not normalized (sum of squares = {total})"
            )));
        }
        let entropy = if alpha == 1.0 {
            -self
                .values
                .iter()
                .map(|v| v * v)
                .filter(|&p| p > 0.0)
                .map(|p| p * p.ln())
                .sum::<f64>()
        } else {
            let s: f64 = self.values.iter().map(|v| (v * v).powf(alpha)).sum();
            s.ln() / (1.0 - alpha)
        };
        Ok(entropy.max(0.0))
    }

    /// Rényi entropy in bits.
    pub fn renyi_entropy_bits(&self, alpha: f64) -> Result<f64> {
        Ok(self.renyi_entropy(alpha)? / std::f64::consts::LN_2)
    }

    /// Number of values above `rel_tol` times the largest value; 0 for an
    /// all-zero spectrum. The relative cutoff keeps the count scale-free.
    pub fn numerical_rank(&self, rel_tol: f64) -> usize {
        let max = self.values.first().copied().unwrap_or(0.0);
        if max == 0.0 {
            return 0;
        }
        self.values.iter().filter(|&&v| v > rel_tol * max).count()
    }

    pub fn rank(&self) -> usize {
        self.numerical_rank(DEFAULT_RANK_TOL)
    }
}
