//! Lattice geometry for the physical layer and every hidden layer.
//!
//! All layers of a network share one geometry, duplicated from the physical
//! system, so distances between neurons in different layers are well
//! defined. Supported lattices are 1d chains and 2d square lattices with
//! sites on vertices, plus the edge lattice of an `L x L` torus (used by
//! the toric code and torus-image systems, where degrees of freedom live
//! on edges).
//!
//! Coordinates are kept as *doubled* integers so that edge midpoints
//! (half-integer positions) stay exact; distances are Chebyshev (L-inf)
//! in lattice units, with minimum-image wrap on periodic lattices.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::neural::NetworkSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    /// Degrees of freedom on lattice vertices.
    Vertex,
    /// Degrees of freedom on the edges of an `L x L` periodic square
    /// lattice; site ids run over `(x, y, horizontal|vertical)`.
    Edge,
}

/// A doubled-integer position: `(2x, 2y)` for vertices, odd components
/// for edge midpoints. Exact, hashable, and wrap-safe.
pub type DoubledCoord = [i64; 2];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeGeometry {
    kind: LatticeKind,
    boundary: Boundary,
    /// `[n]` for chains, `[w, h]` for 2d lattices (`[l, l]` for edge lattices).
    dims: Vec<usize>,
}

impl LatticeGeometry {
    pub fn chain(n: usize, boundary: Boundary) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("chain length must be positive".into()));
        }
        Ok(Self {
            kind: LatticeKind::Vertex,
            boundary,
            dims: vec![n],
        })
    }

    pub fn square(width: usize, height: usize, boundary: Boundary) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config("lattice dimensions must be positive".into()));
        }
        Ok(Self {
            kind: LatticeKind::Vertex,
            boundary,
            dims: vec![width, height],
        })
    }

    /// Edge lattice of the `l x l` torus: `2 l^2` sites indexed
    /// `2 (y l + x) + dir` with `dir` 0 = horizontal, 1 = vertical.
    pub fn torus_edges(l: usize) -> Result<Self> {
        if l < 2 {
            return Err(Error::Config("edge lattice needs l >= 2".into()));
        }
        Ok(Self {
            kind: LatticeKind::Edge,
            boundary: Boundary::Periodic,
            dims: vec![l, l],
        })
    }

    pub fn from_parts(kind: LatticeKind, dims: &[usize], boundary: Boundary) -> Result<Self> {
        match (kind, dims) {
            (LatticeKind::Vertex, [n]) => Self::chain(*n, boundary),
            (LatticeKind::Vertex, [w, h]) => Self::square(*w, *h, boundary),
            (LatticeKind::Edge, [l]) => Self::torus_edges(*l),
            (LatticeKind::Edge, [a, b]) if a == b => Self::torus_edges(*a),
            (LatticeKind::Edge, _) => Err(Error::Config(
                "edge lattice must be square: dims [l] or [l, l]".into(),
            )),
            _ => Err(Error::Config(format!(
                "unsupported lattice dims {dims:?}: expected [n] or [w, h]"
            ))),
        }
    }

    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dimensionality(&self) -> usize {
        self.dims.len()
    }

    pub fn n_sites(&self) -> usize {
        match (self.kind, self.dims.as_slice()) {
            (LatticeKind::Vertex, [n]) => *n,
            (LatticeKind::Vertex, [w, h]) => w * h,
            (LatticeKind::Edge, [l, _]) => 2 * l * l,
            _ => unreachable!("constructors only admit the shapes above"),
        }
    }

    /// Doubled-axis extents used for minimum-image wrapping.
    fn doubled_extent(&self) -> [i64; 2] {
        match (self.kind, self.dims.as_slice()) {
            (LatticeKind::Vertex, [n]) => [2 * *n as i64, 1],
            (LatticeKind::Vertex, [w, h]) => [2 * *w as i64, 2 * *h as i64],
            (LatticeKind::Edge, [l, _]) => [2 * *l as i64, 2 * *l as i64],
            _ => unreachable!(),
        }
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_sites() {
            return Err(Error::Input(format!(
                "unknown site id {site} (lattice has {} sites)",
                self.n_sites()
            )));
        }
        Ok(())
    }

    /// Doubled coordinates of a site. Vertices sit on even coordinates,
    /// edge midpoints have exactly one odd component.
    pub fn site_coords(&self, site: usize) -> Result<DoubledCoord> {
        self.check_site(site)?;
        Ok(match (self.kind, self.dims.as_slice()) {
            (LatticeKind::Vertex, [_]) => [2 * site as i64, 0],
            (LatticeKind::Vertex, [w, _]) => {
                let x = (site % w) as i64;
                let y = (site / w) as i64;
                [2 * x, 2 * y]
            }
            (LatticeKind::Edge, [l, _]) => {
                let dir = site % 2;
                let v = site / 2;
                let x = (v % l) as i64;
                let y = (v / l) as i64;
                if dir == 0 {
                    [2 * x + 1, 2 * y]
                } else {
                    [2 * x, 2 * y + 1]
                }
            }
            _ => unreachable!(),
        })
    }

    /// Chebyshev distance between two doubled coordinates, in lattice units.
    pub fn coord_distance(&self, a: DoubledCoord, b: DoubledCoord) -> f64 {
        let ext = self.doubled_extent();
        let mut worst = 0i64;
        for axis in 0..2 {
            let mut d = (a[axis] - b[axis]).abs();
            if self.boundary == Boundary::Periodic && ext[axis] > 1 {
                d = d.rem_euclid(ext[axis]);
                d = d.min(ext[axis] - d);
            }
            worst = worst.max(d);
        }
        worst as f64 / 2.0
    }

    /// L-inf distance between two sites; wraps on periodic lattices.
    pub fn distance(&self, a: usize, b: usize) -> Result<f64> {
        Ok(self.coord_distance(self.site_coords(a)?, self.site_coords(b)?))
    }

    /// All sites within `eps` of `center` (always contains the center).
    pub fn epsilon_ball(&self, center: usize, eps: f64) -> Result<Neighborhood> {
        if eps.is_nan() || eps < 0.0 {
            return Err(Error::Input(format!(
                "epsilon must be non-negative, got {eps}"
            )));
        }
        self.check_site(center)?;
        let c = self.site_coords(center)?;
        let members: BTreeSet<usize> = (0..self.n_sites())
            .filter(|&s| self.coord_distance(c, self.site_coords(s).expect("site in range")) <= eps)
            .collect();
        Ok(Neighborhood {
            center,
            radius: eps,
            members,
        })
    }
}

/// The `eps`-neighborhood of a site.
#[derive(Debug, Clone)]
pub struct Neighborhood {
    pub center: usize,
    pub radius: f64,
    pub members: BTreeSet<usize>,
}

/// One connection that breaks the locality constraint.
#[derive(Debug, Clone, Serialize)]
pub struct LocalityViolation {
    /// Which adjacent-layer pair the edge belongs to, e.g. "visible-hidden".
    pub layer: String,
    /// Index of the neuron in the deeper of the two layers.
    pub neuron: usize,
    /// Index of the neuron it connects to in the adjacent layer.
    pub other: usize,
    pub distance: f64,
}

/// Result of checking a network spec against an `eps`-locality constraint.
#[derive(Debug, Clone, Serialize)]
pub struct LocalityReport {
    pub is_local: bool,
    /// Maximum number of adjacent-layer connections of any hidden neuron.
    pub k: usize,
    pub violations: Vec<LocalityViolation>,
}

/// Checks every nonzero connection of `spec` against the `eps`-neighborhood
/// rule and reports the connectivity number K.
///
/// Hidden-layer neurons default to the duplicated physical-layer position
/// of the same index; specs may override positions per neuron. A hidden
/// neuron with no position (index beyond the lattice and no override) is a
/// configuration error.
pub fn validate_k_local(
    spec: &NetworkSpec,
    geometry: &LatticeGeometry,
    eps: f64,
) -> Result<LocalityReport> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::Input(format!(
            "epsilon must be non-negative, got {eps}"
        )));
    }
    let mut violations = Vec::new();
    let mut k = 0usize;
    for pair in spec.layer_pairs() {
        let lower = layer_positions(geometry, &pair.lower_positions, pair.lower_len, &pair.name)?;
        let upper = layer_positions(geometry, &pair.upper_positions, pair.upper_len, &pair.name)?;
        // K counts connections of the deeper layer's neurons into this pair,
        // and of the shallower layer's neurons upward, so both directions of
        // every adjacency are covered.
        let mut upper_degree = vec![0usize; pair.upper_len];
        let mut lower_degree = vec![0usize; pair.lower_len];
        for (low, up) in pair.connections.iter().copied() {
            upper_degree[up] += 1;
            lower_degree[low] += 1;
            let d = geometry.coord_distance(lower[low], upper[up]);
            if d > eps {
                violations.push(LocalityViolation {
                    layer: pair.name.clone(),
                    neuron: up,
                    other: low,
                    distance: d,
                });
            }
        }
        k = k
            .max(upper_degree.iter().copied().max().unwrap_or(0))
            .max(if pair.lower_is_physical {
                0 // the physical layer is not a hidden layer
            } else {
                lower_degree.iter().copied().max().unwrap_or(0)
            });
    }
    Ok(LocalityReport {
        is_local: violations.is_empty(),
        k,
        violations,
    })
}

fn layer_positions(
    geometry: &LatticeGeometry,
    overrides: &Option<Vec<DoubledCoord>>,
    len: usize,
    layer: &str,
) -> Result<Vec<DoubledCoord>> {
    if let Some(pos) = overrides {
        if pos.len() != len {
            return Err(Error::Config(format!(
                "layer {layer}: {} position overrides for {len} neurons",
                pos.len()
            )));
        }
        return Ok(pos.clone());
    }
    (0..len)
        .map(|j| {
            geometry.site_coords(j).map_err(|_| {
                Error::Config(format!(
                    "layer {layer}: neuron {j} has no lattice position \
                     (layer is wider than the lattice and no override was given)"
                ))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::{random_network, Locality, RandomKind};

    #[test]
    fn chain_distances_wrap_and_open() {
        let periodic = LatticeGeometry::chain(8, Boundary::Periodic).unwrap();
        assert_eq!(periodic.distance(0, 7).unwrap(), 1.0);
        let open = LatticeGeometry::chain(8, Boundary::Open).unwrap();
        assert_eq!(open.distance(0, 7).unwrap(), 7.0);
    }

    #[test]
    fn square_diagonal_wrap_under_linf() {
        let g = LatticeGeometry::square(3, 3, Boundary::Periodic).unwrap();
        // (0,0) to (2,2) wraps to the diagonal neighbor.
        assert_eq!(g.distance(0, 8).unwrap(), 1.0);
    }

    #[test]
    fn unknown_site_is_input_error() {
        let g = LatticeGeometry::chain(4, Boundary::Open).unwrap();
        assert!(matches!(g.distance(0, 9), Err(Error::Input(_))));
    }

    #[test]
    fn unit_ball_on_open_chain() {
        let g = LatticeGeometry::chain(9, Boundary::Open).unwrap();
        let ball = g.epsilon_ball(4, 1.0).unwrap();
        assert_eq!(
            ball.members.iter().copied().collect::<Vec<_>>(),
            vec![3, 4, 5]
        );
        let edge = g.epsilon_ball(0, 1.0).unwrap();
        assert_eq!(edge.members.iter().copied().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn unit_ball_covers_periodic_3x3() {
        // Brute-force expectation: every site of the 3x3 torus is within
        // L-inf distance 1 of the center.
        let g = LatticeGeometry::square(3, 3, Boundary::Periodic).unwrap();
        let ball = g.epsilon_ball(4, 1.0).unwrap();
        assert_eq!(ball.members.len(), 9);
    }

    #[test]
    fn epsilon_ball_monotone_in_eps() {
        let g = LatticeGeometry::square(4, 4, Boundary::Periodic).unwrap();
        for center in 0..16 {
            let mut prev: Option<BTreeSet<usize>> = None;
            for eps in [0.0, 0.5, 1.0, 1.5, 2.0] {
                let ball = g.epsilon_ball(center, eps).unwrap();
                assert!(ball.members.contains(&center));
                if let Some(p) = &prev {
                    assert!(p.is_subset(&ball.members));
                }
                prev = Some(ball.members);
            }
        }
    }

    #[test]
    fn distance_is_a_metric() {
        use rand::{Rng, SeedableRng};
        let g = LatticeGeometry::torus_edges(3).unwrap();
        let n = g.n_sites();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let (a, b, c) = (
                rng.gen_range(0..n),
                rng.gen_range(0..n),
                rng.gen_range(0..n),
            );
            let dab = g.distance(a, b).unwrap();
            let dba = g.distance(b, a).unwrap();
            assert_eq!(dab, dba);
            assert_eq!(dab == 0.0, a == b);
            let dac = g.distance(a, c).unwrap();
            let dcb = g.distance(c, b).unwrap();
            assert!(dab <= dac + dcb + 1e-12);
        }
    }

    #[test]
    fn edge_lattice_midpoint_stencils() {
        let g = LatticeGeometry::torus_edges(3).unwrap();
        // Edges sharing a vertex sit half a lattice unit apart.
        let h00 = 0; // horizontal edge at (0,0)
        let v00 = 1; // vertical edge at (0,0)
        assert_eq!(g.distance(h00, v00).unwrap(), 0.5);
        assert_eq!(g.n_sites(), 18);
    }

    #[test]
    fn local_random_rbm_validates_and_dense_does_not() {
        let g = LatticeGeometry::chain(9, Boundary::Periodic).unwrap();
        let local = random_network(RandomKind::Rbm, 9, Locality::Local { k: 3 }, 11, 0.5);
        let report = validate_k_local(&local, &g, 1.0).unwrap();
        assert!(report.is_local);
        assert_eq!(report.k, 3);

        let dense = random_network(RandomKind::Rbm, 6, Locality::Dense, 11, 0.5);
        let g6 = LatticeGeometry::chain(6, Boundary::Periodic).unwrap();
        let report = validate_k_local(&dense, &g6, 1.0).unwrap();
        assert!(!report.is_local);
        assert!(!report.violations.is_empty());
    }

    #[test]
    fn zero_weight_network_is_trivially_local() {
        use crate::neural::{RbmSpec, WeightMatrix};
        use crate::state::Alphabet;
        let w = WeightMatrix::new(
            4,
            4,
            vec![num_complex::Complex64::default(); 16],
            vec![false; 16],
        )
        .unwrap();
        let spec = RbmSpec::new(
            vec![num_complex::Complex64::default(); 4],
            vec![num_complex::Complex64::default(); 4],
            w,
            Alphabet::PlusMinus,
            Alphabet::PlusMinus,
        )
        .unwrap();
        let g = LatticeGeometry::chain(4, Boundary::Periodic).unwrap();
        let report = validate_k_local(&NetworkSpec::Rbm(spec), &g, 0.0).unwrap();
        assert!(report.is_local);
        assert_eq!(report.k, 0);
    }

    #[test]
    fn locality_invariant_under_hidden_relabeling() {
        use crate::neural::RbmSpec;
        let g = LatticeGeometry::chain(8, Boundary::Periodic).unwrap();
        let spec = match random_network(RandomKind::Rbm, 8, Locality::Local { k: 3 }, 3, 1.0) {
            NetworkSpec::Rbm(s) => s,
            _ => unreachable!(),
        };
        let base = validate_k_local(&NetworkSpec::Rbm(spec.clone()), &g, 1.0).unwrap();

        // Reverse the hidden-unit order, carrying weights, biases and
        // positions along; the report must not change.
        let m = spec.n_hidden();
        let n = spec.n_visible();
        let perm: Vec<usize> = (0..m).rev().collect();
        let mut weights = vec![num_complex::Complex64::default(); n * m];
        let mut mask = vec![false; n * m];
        for j in 0..m {
            for i in 0..n {
                weights[i * m + j] = spec.weights().get(i, perm[j]);
                mask[i * m + j] = spec.weights().connected(i, perm[j]);
            }
        }
        let positions: Vec<_> = (0..m).map(|j| g.site_coords(perm[j]).unwrap()).collect();
        let relabeled = RbmSpec::new(
            spec.visible_bias().to_vec(),
            perm.iter().map(|&j| spec.hidden_bias()[j]).collect(),
            crate::neural::WeightMatrix::new(n, m, weights, mask).unwrap(),
            spec.visible_alphabet(),
            spec.hidden_alphabet(),
        )
        .unwrap()
        .with_hidden_positions(positions);
        let relab = validate_k_local(&NetworkSpec::Rbm(relabeled), &g, 1.0).unwrap();
        assert_eq!(base.is_local, relab.is_local);
        assert_eq!(base.k, relab.k);
    }
}
