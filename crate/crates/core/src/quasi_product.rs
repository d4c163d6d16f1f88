//! Local K-cluster quasi-product states.
//!
//! A quasi-product state assigns to each local cluster of sites a complex
//! table; the wavefunction is the product of the cluster values on the
//! local configuration. This module holds the generic cover machinery,
//! the three explicit constructions (1d cluster state, toric code,
//! graph states), stabilizer verification, and the boundary-cluster
//! classification that drives the entanglement rank bound.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::state::{evaluate_all, Alphabet, Bipartition, DenseState, Pauli, SpinConfiguration};
use crate::{write_atomic, Error, Result};

/// One cluster: an ordered list of sites and a complex table over the
/// `2^|sites|` local configurations (listed site order = bit order,
/// first site least significant).
#[derive(Debug, Clone, PartialEq)]
pub struct LocalCluster {
    sites: Vec<usize>,
    table: Vec<Complex64>,
}

impl LocalCluster {
    pub fn new(sites: Vec<usize>, table: Vec<Complex64>) -> Result<Self> {
        let distinct: BTreeSet<usize> = sites.iter().copied().collect();
        if distinct.len() != sites.len() {
            return Err(Error::Input(format!(
                "cluster sites {sites:?} are not distinct"
            )));
        }
        if sites.len() > 24 {
            return Err(Error::Resource(format!(
                "cluster of {} sites is too large",
                sites.len()
            )));
        }
        if table.len() != 1 << sites.len() {
            return Err(Error::Input(format!(
                "cluster table has {} entries, needs {}",
                table.len(),
                1 << sites.len()
            )));
        }
        Ok(Self { sites, table })
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn table(&self) -> &[Complex64] {
        &self.table
    }

    #[inline]
    fn local_index(&self, config: &SpinConfiguration) -> usize {
        let mut idx = 0usize;
        for (t, &s) in self.sites.iter().enumerate() {
            idx |= usize::from(config.bit(s)) << t;
        }
        idx
    }

    #[inline]
    pub fn value(&self, config: &SpinConfiguration) -> Complex64 {
        self.table[self.local_index(config)]
    }

    /// Multiplies every table entry by a scalar (used to fold in constants).
    fn scale(&mut self, factor: Complex64) {
        for v in &mut self.table {
            *v *= factor;
        }
    }
}

/// A local cluster cover: clusters whose site sets jointly cover all sites.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterCover {
    n_sites: usize,
    alphabet: Alphabet,
    clusters: Vec<LocalCluster>,
}

impl ClusterCover {
    pub fn new(n_sites: usize, alphabet: Alphabet, clusters: Vec<LocalCluster>) -> Result<Self> {
        let mut covered = vec![false; n_sites];
        for cl in &clusters {
            for &s in cl.sites() {
                if s >= n_sites {
                    return Err(Error::Input(format!(
                        "cluster site {s} out of range 0..{n_sites}"
                    )));
                }
                covered[s] = true;
            }
        }
        if let Some(missing) = covered.iter().position(|c| !c) {
            return Err(Error::Input(format!(
                "clusters do not cover site {missing}; a cover must touch every site"
            )));
        }
        Ok(Self {
            n_sites,
            alphabet,
            clusters,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn clusters(&self) -> &[LocalCluster] {
        &self.clusters
    }

    /// Largest cluster size K.
    pub fn k(&self) -> usize {
        self.clusters
            .iter()
            .map(|c| c.sites.len())
            .max()
            .unwrap_or(0)
    }

    /// The quasi-product amplitude: the product of all cluster values.
    pub fn amplitude(&self, config: &SpinConfiguration) -> Result<Complex64> {
        if config.n_sites() != self.n_sites {
            return Err(Error::Input(format!(
                "configuration has {} sites, cover has {}",
                config.n_sites(),
                self.n_sites
            )));
        }
        if config.alphabet() != self.alphabet {
            return Err(Error::Input(
                "configuration alphabet does not match cover".into(),
            ));
        }
        Ok(self.amplitude_unchecked(config))
    }

    #[inline]
    fn amplitude_unchecked(&self, config: &SpinConfiguration) -> Complex64 {
        self.clusters.iter().map(|c| c.value(config)).product()
    }

    /// Materializes the cover as a dense state (unnormalized).
    pub fn evaluate(&self, max_sites: usize) -> Result<DenseState> {
        evaluate_all(self.n_sites, self.alphabet, max_sites, |cfg| {
            self.amplitude_unchecked(cfg)
        })
    }

    /// Splits clusters into internal (inside A), external (inside A^c) and
    /// boundary (straddling) classes; `boundary_sites` is the set B of all
    /// sites contained in boundary clusters.
    pub fn classify(&self, part: &Bipartition) -> ClusterClassification {
        let mut out = ClusterClassification::default();
        for (i, cl) in self.clusters.iter().enumerate() {
            let inside = cl.sites.iter().any(|&s| part.contains(s));
            let outside = cl.sites.iter().any(|&s| !part.contains(s));
            match (inside, outside) {
                (true, false) => out.internal.push(i),
                (false, true) => out.external.push(i),
                (true, true) => {
                    out.boundary.push(i);
                    out.boundary_sites.extend(cl.sites.iter().copied());
                }
                (false, false) => unreachable!("clusters are nonempty"),
            }
        }
        out
    }

    /// Schmidt-rank bound `2^|B|` from the boundary-cluster site set.
    pub fn rank_bound(&self, part: &Bipartition) -> RankBound {
        RankBound::from_log2(self.classify(part).boundary_sites.len())
    }

    /// Folds a constant factor into the first cluster's table (used for
    /// hidden units without connections, whose trace is a scalar).
    pub(crate) fn scaled_first_cluster(mut self, factor: Complex64) -> Self {
        if let Some(first) = self.clusters.first_mut() {
            first.scale(factor);
        }
        self
    }

    pub fn to_json(&self) -> String {
        let file = CoverFile {
            n_sites: self.n_sites,
            alphabet: self.alphabet,
            clusters: self
                .clusters
                .iter()
                .map(|c| ClusterFile {
                    sites: c.sites.clone(),
                    table_re: c.table.iter().map(|v| v.re).collect(),
                    table_im: c.table.iter().map(|v| v.im).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("cover serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: CoverFile =
            serde_json::from_str(json).map_err(|e| Error::Format(format!("cover json: {e}")))?;
        let clusters = file
            .clusters
            .into_iter()
            .map(|c| {
                if c.table_re.len() != c.table_im.len() {
                    return Err(Error::Format("table_re and table_im lengths differ".into()));
                }
                LocalCluster::new(
                    c.sites,
                    c.table_re
                        .into_iter()
                        .zip(c.table_im)
                        .map(|(re, im)| Complex64::new(re, im))
                        .collect(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.n_sites, file.alphabet, clusters)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json().as_bytes())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct CoverFile {
    n_sites: usize,
    alphabet: Alphabet,
    clusters: Vec<ClusterFile>,
}

#[derive(Serialize, Deserialize)]
struct ClusterFile {
    sites: Vec<usize>,
    table_re: Vec<f64>,
    table_im: Vec<f64>,
}

/// Cluster indices per class, plus the boundary site set B.
#[derive(Debug, Clone, Default)]
pub struct ClusterClassification {
    pub internal: Vec<usize>,
    pub external: Vec<usize>,
    pub boundary: Vec<usize>,
    pub boundary_sites: BTreeSet<usize>,
}

/// `2^log2` kept overflow-safe: `value` is None once log2 exceeds 63.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankBound {
    pub log2: usize,
    pub value: Option<u64>,
}

impl RankBound {
    pub fn from_log2(log2: usize) -> Self {
        Self {
            log2,
            value: (log2 < 64).then(|| 1u64 << log2),
        }
    }

    pub fn admits_rank(&self, rank: usize) -> bool {
        match self.value {
            Some(v) => rank as u64 <= v,
            None => true,
        }
    }
}

/// The 1d cluster state on a periodic chain of `n >= 3` sites, built from
/// the translation-invariant three-site cluster function
/// `phi(a, s, c) = 2 cos(pi (1 + 2a + 3s + c) / 4)` on spins `a, s, c = ±1`.
pub fn cluster_state_1d(n: usize) -> Result<ClusterCover> {
    if n < 3 {
        return Err(Error::Input(format!(
            "cluster-state stencil needs n >= 3 sites, got {n}"
        )));
    }
    let pm = Alphabet::PlusMinus;
    let clusters = (0..n)
        .map(|k| {
            let sites = vec![(k + n - 1) % n, k, (k + 1) % n];
            let table = (0..8)
                .map(|m| {
                    let a = pm.value((m & 1) as u8);
                    let s = pm.value(((m >> 1) & 1) as u8);
                    let c = pm.value(((m >> 2) & 1) as u8);
                    let angle = PI * (1.0 + 2.0 * a + 3.0 * s + c) / 4.0;
                    Complex64::new(2.0 * angle.cos(), 0.0)
                })
                .collect();
            LocalCluster::new(sites, table)
        })
        .collect::<Result<Vec<_>>>()?;
    ClusterCover::new(n, pm, clusters)
}

/// Stabilizers `Z_{k-1} X_k Z_{k+1}` of the periodic cluster state.
pub fn cluster_state_stabilizers(n: usize) -> Vec<Vec<(usize, Pauli)>> {
    (0..n)
        .map(|k| {
            vec![
                ((k + n - 1) % n, Pauli::Z),
                (k, Pauli::X),
                ((k + 1) % n, Pauli::Z),
            ]
        })
        .collect()
}

/// Graph state over `{0,1}` pixels: one two-site cluster per edge with
/// table `(1, 1, 1, -1)/sqrt(2)`; isolated vertices get a constant
/// one-site cluster so the cover condition holds.
pub fn graph_state(edges: &[(usize, usize)], n: usize) -> Result<ClusterCover> {
    let mut canonical = BTreeSet::new();
    for &(i, j) in edges {
        if i >= n || j >= n {
            return Err(Error::Input(format!(
                "edge ({i}, {j}) references a vertex >= {n}"
            )));
        }
        if i == j {
            return Err(Error::Input(format!(
                "self-loop at vertex {i} is not allowed"
            )));
        }
        canonical.insert((i.min(j), i.max(j)));
    }
    let mut touched = vec![false; n];
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut clusters = Vec::new();
    for (i, j) in canonical {
        touched[i] = true;
        touched[j] = true;
        clusters.push(LocalCluster::new(
            vec![i, j],
            vec![
                Complex64::new(inv_sqrt2, 0.0),
                Complex64::new(inv_sqrt2, 0.0),
                Complex64::new(inv_sqrt2, 0.0),
                Complex64::new(-inv_sqrt2, 0.0),
            ],
        )?);
    }
    for (v, covered) in touched.iter().enumerate() {
        if !covered {
            clusters.push(LocalCluster::new(
                vec![v],
                vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
            )?);
        }
    }
    ClusterCover::new(n, Alphabet::ZeroOne, clusters)
}

/// Per-stabilizer fidelities `|<psi|P|psi>|`; pass means fidelity at least
/// `1 - 1e-9`.
#[derive(Debug, Clone, Serialize)]
pub struct StabilizerReport {
    pub all_pass: bool,
    pub fidelities: Vec<f64>,
}

pub const STABILIZER_PASS_TOL: f64 = 1e-9;

pub fn verify_stabilizers(
    state: &DenseState,
    stabilizers: &[Vec<(usize, Pauli)>],
) -> Result<StabilizerReport> {
    if !state.is_normalized() {
        return Err(Error::Precondition(
            "stabilizer check needs a normalized state".into(),
        ));
    }
    let mut fidelities = Vec::with_capacity(stabilizers.len());
    for stab in stabilizers {
        let transformed = state.apply_pauli_string(stab)?;
        fidelities.push(state.inner(&transformed)?.norm());
    }
    let all_pass = fidelities.iter().all(|f| *f >= 1.0 - STABILIZER_PASS_TOL);
    Ok(StabilizerReport {
        all_pass,
        fidelities,
    })
}

pub mod toric {
    //! Toric code on the edge lattice of an `L x L` torus.
    //!
    //! Edge `(x, y, 0)` joins vertex `(x, y)` to `(x+1 mod L, y)`; edge
    //! `(x, y, 1)` joins `(x, y)` to `(x, y+1 mod L)`; edge id is
    //! `2 (y L + x) + dir`. Occupied edges are bit 1 (spin -1).

    use super::*;

    pub fn n_edges(l: usize) -> usize {
        2 * l * l
    }

    pub fn edge_index(l: usize, x: usize, y: usize, dir: usize) -> usize {
        debug_assert!(dir < 2);
        2 * ((y % l) * l + (x % l)) + dir
    }

    /// The four edges incident to vertex `(x, y)`.
    pub fn vertex_star(l: usize, x: usize, y: usize) -> [usize; 4] {
        [
            edge_index(l, x, y, 0),
            edge_index(l, x + l - 1, y, 0),
            edge_index(l, x, y, 1),
            edge_index(l, x, y + l - 1, 1),
        ]
    }

    /// The four edges around the face with lower-left corner `(x, y)`.
    pub fn plaquette_boundary(l: usize, x: usize, y: usize) -> [usize; 4] {
        [
            edge_index(l, x, y, 0),
            edge_index(l, x, y + 1, 0),
            edge_index(l, x, y, 1),
            edge_index(l, x + 1, y, 1),
        ]
    }

    pub fn vertex_stabilizer(l: usize, x: usize, y: usize) -> Vec<(usize, Pauli)> {
        vertex_star(l, x, y)
            .iter()
            .map(|&e| (e, Pauli::X))
            .collect()
    }

    pub fn plaquette_stabilizer(l: usize, x: usize, y: usize) -> Vec<(usize, Pauli)> {
        plaquette_boundary(l, x, y)
            .iter()
            .map(|&e| (e, Pauli::Z))
            .collect()
    }

    /// All `2 L^2` stabilizers, vertices first.
    pub fn all_stabilizers(l: usize) -> Vec<Vec<(usize, Pauli)>> {
        let mut out = Vec::with_capacity(2 * l * l);
        for y in 0..l {
            for x in 0..l {
                out.push(vertex_stabilizer(l, x, y));
            }
        }
        for y in 0..l {
            for x in 0..l {
                out.push(plaquette_stabilizer(l, x, y));
            }
        }
        out
    }

    /// The quasi-product cover with one cluster per vertex
    /// (`cos[(pi/2) sum s]`) and one per plaquette (`cos[(pi/4) sum s]`),
    /// over ±1 spins.
    pub fn cover(l: usize) -> Result<ClusterCover> {
        let pm = Alphabet::PlusMinus;
        let mut clusters = Vec::with_capacity(2 * l * l);
        let table = |sites: [usize; 4], freq: f64| -> Result<LocalCluster> {
            let table = (0..16)
                .map(|m: usize| {
                    let total: f64 = (0..4).map(|t| pm.value(((m >> t) & 1) as u8)).sum();
                    Complex64::new((freq * total).cos(), 0.0)
                })
                .collect();
            LocalCluster::new(sites.to_vec(), table)
        };
        for y in 0..l {
            for x in 0..l {
                clusters.push(table(vertex_star(l, x, y), PI / 2.0)?);
                clusters.push(table(plaquette_boundary(l, x, y), PI / 4.0)?);
            }
        }
        ClusterCover::new(n_edges(l), pm, clusters)
    }

    /// True when every plaquette touches an even number of occupied edges,
    /// i.e. the occupied edges close up into loops of the dual lattice.
    pub fn is_loop(l: usize, bits: u64) -> bool {
        for y in 0..l {
            for x in 0..l {
                let parity = plaquette_boundary(l, x, y)
                    .iter()
                    .map(|&e| (bits >> e) & 1)
                    .sum::<u64>()
                    % 2;
                if parity != 0 {
                    return false;
                }
            }
        }
        true
    }

    /// Winding parities of a loop configuration, measured as the mod-2
    /// count of occupied edges on a fixed column of vertical edges (x
    /// direction) and a fixed row of horizontal edges (y direction).
    pub fn winding(l: usize, bits: u64) -> (u8, u8) {
        let wx = (0..l)
            .map(|y| (bits >> edge_index(l, 0, y, 1)) & 1)
            .sum::<u64>()
            % 2;
        let wy = (0..l)
            .map(|x| (bits >> edge_index(l, x, 0, 0)) & 1)
            .sum::<u64>()
            % 2;
        (wx as u8, wy as u8)
    }

    /// Ground state of the toric code in a fixed winding sector.
    ///
    /// The trivial sector comes from evaluating the quasi-product cover
    /// and restricting to trivial winding; nontrivial sectors are built by
    /// direct enumeration of loop configurations with matching winding
    /// parity and equal amplitudes.
    pub fn ground_state(l: usize, sector: (u8, u8), max_sites: usize) -> Result<DenseState> {
        if sector.0 > 1 || sector.1 > 1 {
            return Err(Error::Input(format!(
                "winding sector {sector:?} must be in {{0,1}}^2"
            )));
        }
        crate::state::check_site_budget(n_edges(l), max_sites)?;
        let state = if sector == (0, 0) {
            let cover = cover(l)?;
            let dense = cover.evaluate(max_sites)?;
            let amplitudes = dense
                .amplitudes()
                .iter()
                .enumerate()
                .map(|(idx, amp)| {
                    if winding(l, idx as u64) == (0, 0) {
                        *amp
                    } else {
                        Complex64::default()
                    }
                })
                .collect();
            DenseState::new(n_edges(l), amplitudes)?
        } else {
            let n = n_edges(l);
            let amplitudes = (0..1u64 << n)
                .map(|bits| {
                    if is_loop(l, bits) && winding(l, bits) == sector {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::default()
                    }
                })
                .collect();
            DenseState::new(n, amplitudes)?
        };
        state.normalize()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_site_cluster_is_a_product_state() {
        let cover = ClusterCover::new(
            1,
            Alphabet::ZeroOne,
            vec![LocalCluster::new(vec![0], vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap()],
        )
        .unwrap();
        let cfg = SpinConfiguration::from_index(1, 0, Alphabet::ZeroOne).unwrap();
        assert_eq!(cover.amplitude(&cfg).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn graph_edge_amplitude_signs() {
        let cover = graph_state(&[(0, 1)], 2).unwrap();
        let both_one = SpinConfiguration::from_index(2, 0b11, Alphabet::ZeroOne).unwrap();
        let expected = -std::f64::consts::FRAC_1_SQRT_2;
        assert!((cover.amplitude(&both_one).unwrap().re - expected).abs() < 1e-15);
        for idx in 0..3u64 {
            let cfg = SpinConfiguration::from_index(2, idx, Alphabet::ZeroOne).unwrap();
            assert!((cover.amplitude(&cfg).unwrap().re + expected).abs() < 1e-15);
        }
    }

    #[test]
    fn triangle_graph_amplitude() {
        let cover = graph_state(&[(0, 1), (1, 2), (0, 2)], 3).unwrap();
        let cfg = SpinConfiguration::from_index(3, 0b111, Alphabet::ZeroOne).unwrap();
        let expected = -1.0 / 8f64.sqrt();
        assert!((cover.amplitude(&cfg).unwrap().re - expected).abs() < 1e-15);
    }

    #[test]
    fn edgeless_graph_has_zero_entropy_everywhere() {
        let cover = graph_state(&[], 3).unwrap();
        let state = cover.evaluate(22).unwrap().normalize().unwrap();
        for region in [vec![0], vec![1], vec![0, 1], vec![0, 2]] {
            let part = Bipartition::new(3, region).unwrap();
            let s = state.schmidt(&part).unwrap().renyi_entropy(2.0).unwrap();
            assert!(s.abs() < 1e-12);
        }
    }

    #[test]
    fn cluster_state_table_and_amplitude() {
        let cover = cluster_state_1d(4).unwrap();
        // All-spin-up entry of any cluster table is 2 cos(7 pi / 4) = sqrt 2.
        let all_up = SpinConfiguration::from_index(4, 0, Alphabet::PlusMinus).unwrap();
        let first = &cover.clusters()[0];
        assert!((first.value(&all_up).re - 2f64.sqrt()).abs() < 1e-12);
        // Product over the four clusters: (sqrt 2)^4 = 4.
        assert!((cover.amplitude(&all_up).unwrap().re - 4.0).abs() < 1e-12);
        assert_eq!(cover.k(), 3);
        assert!(cluster_state_1d(2).is_err());
    }

    #[test]
    fn cluster_state_satisfies_flip_relation_exactly() {
        // amplitude(..., -s_k, ...) = s_{k-1} s_{k+1} amplitude(..., s_k, ...)
        for n in [4usize, 5, 6] {
            let cover = cluster_state_1d(n).unwrap();
            for idx in 0..1u64 << n {
                let cfg = SpinConfiguration::from_index(n, idx, Alphabet::PlusMinus).unwrap();
                let base = cover.amplitude(&cfg).unwrap();
                for k in 0..n {
                    let flipped = cover.amplitude(&cfg.with_bit_flipped(k)).unwrap();
                    let sign = cfg.value((k + n - 1) % n) * cfg.value((k + 1) % n);
                    let expected = base * sign;
                    assert!(
                        (flipped - expected).norm() <= 1e-12 * base.norm().max(1.0),
                        "n={n} idx={idx} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn cluster_state_stabilizers_pass_and_random_state_fails() {
        let cover = cluster_state_1d(6).unwrap();
        let state = cover.evaluate(22).unwrap().normalize().unwrap();
        let report = verify_stabilizers(&state, &cluster_state_stabilizers(6)).unwrap();
        assert!(report.all_pass, "fidelities: {:?}", report.fidelities);

        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let amps: Vec<Complex64> = (0..16)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let random = DenseState::new(4, amps).unwrap().normalize().unwrap();
        let report = verify_stabilizers(&random, &cluster_state_stabilizers(4)).unwrap();
        assert!(!report.all_pass);
    }

    #[test]
    fn amplitude_invariant_under_cluster_reordering() {
        let cover = cluster_state_1d(5).unwrap();
        let mut reversed = cover.clusters().to_vec();
        reversed.reverse();
        let permuted = ClusterCover::new(5, Alphabet::PlusMinus, reversed).unwrap();
        for idx in 0..32u64 {
            let cfg = SpinConfiguration::from_index(5, idx, Alphabet::PlusMinus).unwrap();
            let a = cover.amplitude(&cfg).unwrap();
            let b = permuted.amplitude(&cfg).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn classification_of_half_chain_cut() {
        let cover = cluster_state_1d(8).unwrap();
        let part = Bipartition::new(8, 0..4).unwrap();
        let classes = cover.classify(&part);
        // Clusters straddling the two cuts of the periodic chain.
        assert_eq!(classes.boundary, vec![0, 3, 4, 7]);
        assert_eq!(classes.internal, vec![1, 2]);
        assert_eq!(classes.external, vec![5, 6]);
        assert_eq!(classes.boundary_sites.len(), 8);
        let bound = cover.rank_bound(&part);
        assert_eq!(bound.log2, 8);
    }

    #[test]
    fn no_internal_cluster_contains_an_excluded_site() {
        let cover = cluster_state_1d(7).unwrap();
        let part = Bipartition::new(7, 0..6).unwrap(); // A = all but site 6
        let classes = cover.classify(&part);
        for &i in &classes.internal {
            assert!(!cover.clusters()[i].sites().contains(&6));
        }
    }

    #[test]
    fn one_local_covers_have_empty_boundary() {
        let clusters = (0..4)
            .map(|s| LocalCluster::new(vec![s], vec![c(1.0, 0.0), c(2.0, 0.0)]).unwrap())
            .collect();
        let cover = ClusterCover::new(4, Alphabet::ZeroOne, clusters).unwrap();
        for a in 1..15u64 {
            if a == 0b1111 {
                continue;
            }
            let sites: Vec<usize> = (0..4).filter(|s| (a >> s) & 1 == 1).collect();
            let part = Bipartition::new(4, sites).unwrap();
            let classes = cover.classify(&part);
            assert!(classes.boundary.is_empty());
            assert_eq!(cover.rank_bound(&part), RankBound::from_log2(0));
        }
    }

    #[test]
    fn graph_path_single_cut_bound() {
        let cover = graph_state(&[(0, 1), (1, 2)], 3).unwrap();
        let part = Bipartition::new(3, [0]).unwrap();
        let bound = cover.rank_bound(&part);
        // Only the (0,1) edge cluster straddles; it contributes 2 sites.
        assert_eq!(bound.log2, 2);
        assert_eq!(bound.value, Some(4));
    }

    #[test]
    fn cover_json_round_trip() {
        let cover = cluster_state_1d(4).unwrap();
        let json = cover.to_json();
        let back = ClusterCover::from_json(&json).unwrap();
        assert_eq!(back, cover);
    }

    #[test]
    fn toric_l2_trivial_sector_support_and_stabilizers() {
        let state = toric::ground_state(2, (0, 0), 22).unwrap();
        let nonzero = state
            .amplitudes()
            .iter()
            .filter(|a| a.norm() > 1e-12)
            .count();
        assert_eq!(nonzero, 8);
        let report = verify_stabilizers(&state, &toric::all_stabilizers(2)).unwrap();
        assert!(report.all_pass, "fidelities: {:?}", report.fidelities);
    }

    #[test]
    fn toric_cover_supports_exactly_the_loops() {
        let cover = toric::cover(2).unwrap();
        let dense = cover.evaluate(22).unwrap();
        for (idx, amp) in dense.amplitudes().iter().enumerate() {
            assert_eq!(
                amp.norm() > 1e-12,
                toric::is_loop(2, idx as u64),
                "config {idx:#010b}"
            );
        }
    }

    #[test]
    fn toric_rejects_oversized_lattice() {
        assert!(matches!(
            toric::ground_state(4, (0, 0), 22),
            Err(Error::Resource(_))
        ));
    }
}
