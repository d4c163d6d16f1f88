//! Torus images as Z2 one-chains: boundary map, cycle detection, target
//! sets and their states, and the locally-smooth rank bound.
//!
//! Pixels live on the edges of an `L x L` periodic square lattice with the
//! same indexing as the toric module: edge `(x, y, 0)` joins vertex
//! `(x, y)` to `(x+1, y)`, edge `(x, y, 1)` joins `(x, y)` to `(x, y+1)`,
//! id `2 (y L + x) + dir`. Pixel values are 1 (black) and 0 (white).

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::LatticeGeometry;
use crate::quasi_product::toric;
use crate::state::{check_site_budget, Bipartition, DenseState};
use crate::{write_atomic, Error, Result};

/// A black-and-white torus image: one bit per edge, `2 L^2` bits packed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusImage {
    l: usize,
    bits: u64,
}

impl TorusImage {
    pub fn new(l: usize, bits: u64) -> Result<Self> {
        let n = 2 * l * l;
        if n > 63 {
            return Err(Error::Resource(format!(
                "{n} pixels exceed the 63-bit packing"
            )));
        }
        if bits >> n != 0 {
            return Err(Error::Input(format!(
                "image bits exceed the {n} pixels of l={l}"
            )));
        }
        Ok(Self { l, bits })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n_pixels(&self) -> usize {
        2 * self.l * self.l
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn pixel(&self, x: usize, y: usize, dir: usize) -> u8 {
        ((self.bits >> toric::edge_index(self.l, x, y, dir)) & 1) as u8
    }

    /// The Z2 boundary map: each vertex takes the mod-2 sum of its four
    /// incident edge values.
    pub fn boundary(&self) -> ZeroChain {
        let l = self.l;
        let mut vertex_bits = 0u64;
        for y in 0..l {
            for x in 0..l {
                let parity = toric::vertex_star(l, x, y)
                    .iter()
                    .map(|&e| (self.bits >> e) & 1)
                    .sum::<u64>()
                    % 2;
                vertex_bits |= parity << (y * l + x);
            }
        }
        ZeroChain {
            l,
            bits: vertex_bits,
        }
    }

    /// A circle (one-cycle) is an image whose boundary is trivial.
    pub fn is_cycle(&self) -> bool {
        self.boundary().is_trivial()
    }
}

/// A Z2 zero-chain: one bit per vertex of the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroChain {
    l: usize,
    bits: u64,
}

impl ZeroChain {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn vertex(&self, x: usize, y: usize) -> u8 {
        ((self.bits >> (y * self.l + x)) & 1) as u8
    }

    pub fn is_trivial(&self) -> bool {
        self.bits == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    Cycles { l: usize },
    Random { seed: u64, count: usize },
    Custom,
}

/// An explicit set of images over `n_pixels` edge sites; members are
/// distinct, sorted bit-vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSet {
    n_pixels: usize,
    members: Vec<u64>,
    provenance: Provenance,
}

impl TargetSet {
    pub fn new(n_pixels: usize, mut members: Vec<u64>, provenance: Provenance) -> Result<Self> {
        if n_pixels == 0 || n_pixels > 63 {
            return Err(Error::Input(format!(
                "n_pixels {n_pixels} out of supported range"
            )));
        }
        members.sort_unstable();
        members.dedup();
        if let Some(&bad) = members.iter().find(|&&m| m >> n_pixels != 0) {
            return Err(Error::Input(format!(
                "member {bad:#x} does not fit in {n_pixels} pixels"
            )));
        }
        Ok(Self {
            n_pixels,
            members,
            provenance,
        })
    }

    pub fn n_pixels(&self) -> usize {
        self.n_pixels
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn contains(&self, bits: u64) -> bool {
        self.members.binary_search(&bits).is_ok()
    }

    /// Serializes as a JSON header line followed by one hex bitstring per
    /// member (little-endian bytes of the packed bits).
    pub fn to_text(&self) -> String {
        let header = serde_json::to_string(&TargetSetHeader {
            l: match self.provenance {
                Provenance::Cycles { l } => Some(l),
                _ => None,
            },
            n_pixels: self.n_pixels,
            provenance: self.provenance.clone(),
        })
        .expect("header serialization cannot fail");
        let width = self.n_pixels.div_ceil(8);
        let mut out = header;
        out.push('\n');
        for &m in &self.members {
            out.push_str(&hex::encode(&m.to_le_bytes()[..width]));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: TargetSetHeader = serde_json::from_str(
            lines
                .next()
                .ok_or_else(|| Error::Format("empty target-set file".into()))?,
        )
        .map_err(|e| Error::Format(format!("target-set header: {e}")))?;
        let width = header.n_pixels.div_ceil(8);
        let mut members = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bytes = hex::decode(line.trim())
                .map_err(|e| Error::Format(format!("bad hex bitstring: {e}")))?;
            if bytes.len() != width {
                return Err(Error::Format(format!(
                    "bitstring {line} has {} bytes, expected {width}",
                    bytes.len()
                )));
            }
            let mut buf = [0u8; 8];
            buf[..width].copy_from_slice(&bytes);
            members.push(u64::from_le_bytes(buf));
        }
        Self::new(header.n_pixels, members, header.provenance)
    }

    pub fn write_text(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_text().as_bytes())
    }

    pub fn read_text(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct TargetSetHeader {
    #[serde(skip_serializing_if = "Option::is_none")]
    l: Option<usize>,
    n_pixels: usize,
    provenance: Provenance,
}

/// All images with trivial boundary; their count is `2^{L^2 + 1}`.
pub fn enumerate_cycles(l: usize, max_sites: usize) -> Result<TargetSet> {
    let n = 2 * l * l;
    check_site_budget(n, max_sites)?;
    let members = (0..1u64 << n)
        .filter(|&bits| TorusImage { l, bits }.is_cycle())
        .collect();
    TargetSet::new(n, members, Provenance::Cycles { l })
}

/// The target function: 1 when the image belongs to the set.
pub fn classify(img: &TorusImage, targets: &TargetSet) -> Result<u8> {
    if img.n_pixels() != targets.n_pixels() {
        return Err(Error::Input(format!(
            "image has {} pixels, target set has {}",
            img.n_pixels(),
            targets.n_pixels()
        )));
    }
    Ok(u8::from(targets.contains(img.bits())))
}

/// The normalized equal-amplitude superposition over the target set.
pub fn target_state(targets: &TargetSet, max_sites: usize) -> Result<DenseState> {
    if targets.is_empty() {
        return Err(Error::Degenerate("target set is empty".into()));
    }
    check_site_budget(targets.n_pixels(), max_sites)?;
    let mut amplitudes = vec![Complex64::default(); 1 << targets.n_pixels()];
    for &m in targets.members() {
        amplitudes[m as usize] = Complex64::new(1.0, 0.0);
    }
    DenseState::new(targets.n_pixels(), amplitudes)?.normalize()
}

/// Log2 of the locally-smooth rank bound: `(B + 1) * Area(A)` for a
/// boundary range `B`.
pub fn smooth_rank_bound(
    geometry: &LatticeGeometry,
    part: &Bipartition,
    b_range: usize,
) -> Result<usize> {
    let area = crate::analysis::region_area(geometry, part)?;
    Ok((b_range + 1) * area)
}

/// Deterministic uniform sample of `count` distinct images on `n_pixels`
/// pixels (Floyd's algorithm over the index space).
pub fn random_target_set(n_pixels: usize, count: usize, seed: u64) -> Result<TargetSet> {
    if n_pixels == 0 || n_pixels > 62 {
        return Err(Error::Input(format!(
            "n_pixels {n_pixels} out of supported range"
        )));
    }
    let total = 1u64 << n_pixels;
    if count as u64 > total {
        return Err(Error::Input(format!(
            "cannot sample {count} distinct images from {total}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = std::collections::BTreeSet::new();
    for j in (total - count as u64)..total {
        let t = rng.gen_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    TargetSet::new(
        n_pixels,
        chosen.into_iter().collect(),
        Provenance::Random { seed, count },
    )
}

/// Re-indexes an image into the toric module's edge convention, mapping
/// the vertex-boundary condition onto the plaquette (closed-loop)
/// condition: image edge `(x, y, H)` becomes toric edge `(x+1, y, V)` and
/// `(x, y, V)` becomes `(x, y+1, H)` (lattice duality).
pub fn bridge_to_toric(l: usize, image_bits: u64) -> u64 {
    let mut out = 0u64;
    for y in 0..l {
        for x in 0..l {
            if (image_bits >> toric::edge_index(l, x, y, 0)) & 1 == 1 {
                out |= 1 << toric::edge_index(l, x + 1, y, 1);
            }
            if (image_bits >> toric::edge_index(l, x, y, 1)) & 1 == 1 {
                out |= 1 << toric::edge_index(l, x, y + 1, 0);
            }
        }
    }
    out
}

/// Applies [`bridge_to_toric`] to every basis index of a state.
pub fn bridge_state_to_toric(l: usize, state: &DenseState) -> Result<DenseState> {
    if state.n_sites() != 2 * l * l {
        return Err(Error::Input(format!(
            "state has {} sites, torus l={l} needs {}",
            state.n_sites(),
            2 * l * l
        )));
    }
    let mut amplitudes = vec![Complex64::default(); state.amplitudes().len()];
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        amplitudes[bridge_to_toric(l, idx as u64) as usize] = *amp;
    }
    Ok(DenseState::new(state.n_sites(), amplitudes)?.with_normalized_flag(state.is_normalized()))
}
