//! Region families, entropy sweeps, area-law bound checks, and the
//! topological entanglement entropy combination.
//!
//! `Area(A)` is the number of sites of A with a neighbor (distance <= 1)
//! in the complement, the standard lattice-boundary reading.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::LatticeGeometry;
use crate::neural::DbmSpec;
use crate::quasi_product::{toric, ClusterCover, RankBound};
use crate::state::{Bipartition, DenseState, SchmidtSpectrum};
use crate::{fmt_f64, Error, Result, DEFAULT_RANK_TOL};

/// Families of bipartitions swept by entropy reports.
#[derive(Debug, Clone)]
pub enum RegionFamily {
    /// `[start, start + len)` on a chain (wrapping) for every proper length.
    Contiguous { start: usize },
    /// Every `[start, start + len)` for every start and proper length.
    ContiguousAll,
    /// All placements of a `width x height` block. On a vertex lattice the
    /// block selects vertices; on an edge lattice it selects both edges of
    /// every cell in the block.
    Rect { width: usize, height: usize },
    /// All widths and heights (proper subsets only).
    RectAll,
    /// Explicit site sets.
    Custom(Vec<Vec<usize>>),
}

/// A bipartition plus its lattice-derived descriptors.
#[derive(Debug, Clone)]
pub struct Region {
    pub label: String,
    pub part: Bipartition,
    /// Number of boundary sites of A (see module docs).
    pub area: usize,
    /// Number of sites in A.
    pub volume: usize,
}

/// Number of sites of A adjacent (distance <= 1) to the complement.
pub fn region_area(geometry: &LatticeGeometry, part: &Bipartition) -> Result<usize> {
    let complement = part.complement();
    let mut area = 0;
    for &a in part.region_a() {
        let mut on_boundary = false;
        for &b in &complement {
            if geometry.distance(a, b)? <= 1.0 {
                on_boundary = true;
                break;
            }
        }
        if on_boundary {
            area += 1;
        }
    }
    Ok(area)
}

fn region_from_sites(
    geometry: &LatticeGeometry,
    label: String,
    sites: Vec<usize>,
) -> Result<Region> {
    let part = Bipartition::new(geometry.n_sites(), sites)?;
    let area = region_area(geometry, &part)?;
    let volume = part.region_a().len();
    Ok(Region {
        label,
        part,
        area,
        volume,
    })
}

/// Deterministic, sorted list of regions for a family.
pub fn make_regions(geometry: &LatticeGeometry, family: &RegionFamily) -> Result<Vec<Region>> {
    let n = geometry.n_sites();
    let mut out = Vec::new();
    match family {
        RegionFamily::Contiguous { start } => {
            if *start >= n {
                return Err(Error::Input(format!("start {start} out of range 0..{n}")));
            }
            for len in 1..n {
                let sites: Vec<usize> = (0..len).map(|d| (start + d) % n).collect();
                out.push(region_from_sites(
                    geometry,
                    format!("contig[{start}+{len})"),
                    sites,
                )?);
            }
        }
        RegionFamily::ContiguousAll => {
            for start in 0..n {
                for len in 1..n {
                    let sites: Vec<usize> = (0..len).map(|d| (start + d) % n).collect();
                    out.push(region_from_sites(
                        geometry,
                        format!("contig[{start}+{len})"),
                        sites,
                    )?);
                }
            }
        }
        RegionFamily::Rect { width, height } => {
            out.extend(rect_regions(geometry, *width, *height)?);
        }
        RegionFamily::RectAll => {
            let (w_max, h_max) = lattice_extent(geometry)?;
            for h in 1..=h_max {
                for w in 1..=w_max {
                    match rect_regions(geometry, w, h) {
                        Ok(regions) => out.extend(regions),
                        // The full-lattice block is not a proper subset.
                        Err(Error::Input(_)) => continue,
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        RegionFamily::Custom(list) => {
            for (i, sites) in list.iter().enumerate() {
                out.push(region_from_sites(
                    geometry,
                    format!("custom{i}"),
                    sites.clone(),
                )?)
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Input("region family is empty".into()));
    }
    Ok(out)
}

fn lattice_extent(geometry: &LatticeGeometry) -> Result<(usize, usize)> {
    Ok(match geometry.dims() {
        [n] => (*n, 1),
        [w, h] => (*w, *h),
        _ => return Err(Error::Config("unsupported lattice dims".into())),
    })
}

fn rect_regions(geometry: &LatticeGeometry, width: usize, height: usize) -> Result<Vec<Region>> {
    let (w_max, h_max) = lattice_extent(geometry)?;
    if width == 0 || height == 0 || width > w_max || height > h_max {
        return Err(Error::Input(format!(
            "rectangle {width}x{height} does not fit a {w_max}x{h_max} lattice"
        )));
    }
    let mut out = Vec::new();
    for y0 in 0..h_max {
        for x0 in 0..w_max {
            let mut sites = BTreeSet::new();
            for dy in 0..height {
                for dx in 0..width {
                    let x = (x0 + dx) % w_max;
                    let y = (y0 + dy) % h_max;
                    match geometry.kind() {
                        crate::geometry::LatticeKind::Vertex => {
                            sites.insert(y * w_max + x);
                        }
                        crate::geometry::LatticeKind::Edge => {
                            sites.insert(toric::edge_index(w_max, x, y, 0));
                            sites.insert(toric::edge_index(w_max, x, y, 1));
                        }
                    }
                }
            }
            out.push(region_from_sites(
                geometry,
                format!("rect({x0},{y0},{width},{height})"),
                sites.into_iter().collect(),
            )?);
            if width == w_max && height == h_max {
                // All placements coincide with the full lattice.
                break;
            }
        }
        if width == w_max && height == h_max {
            break;
        }
    }
    Ok(out)
}

/// Where rank bounds come from during a sweep.
pub enum BoundContext<'a> {
    None,
    Cover(&'a ClusterCover),
    Dbm(&'a DbmSpec),
}

impl BoundContext<'_> {
    /// `(log2 bound, |B| on the visible layer)` for a region, when available.
    fn bound_for(&self, part: &Bipartition) -> Result<Option<(usize, usize)>> {
        Ok(match self {
            BoundContext::None => None,
            BoundContext::Cover(cover) => {
                let classes = cover.classify(part);
                let b = classes.boundary_sites.len();
                Some((cover.rank_bound(part).log2, b))
            }
            BoundContext::Dbm(spec) => {
                let boundary = spec.boundary_analysis(part)?;
                Some((boundary.log2_bound, boundary.visible_boundary.len()))
            }
        })
    }
}

/// One row of an entropy report.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyRow {
    pub region: String,
    pub area: usize,
    pub volume: usize,
    pub alpha: f64,
    pub entropy_nats: f64,
    pub entropy_bits: f64,
    pub rank: usize,
    pub rank_bound_log2: Option<usize>,
    pub bound_ok: Option<bool>,
    pub bound_vacuous: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyReport {
    pub rows: Vec<EntropyRow>,
}

pub const BOUND_SLACK: f64 = 1e-9;

impl EntropyReport {
    pub fn all_bounds_ok(&self) -> bool {
        self.rows.iter().all(|r| r.bound_ok.unwrap_or(true))
    }

    pub const CSV_HEADER: &'static str = "region,area,volume,alpha,entropy_nats,entropy_bits,\
rank,rank_bound_log2,bound_ok,bound_vacuous";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let bound = r.rank_bound_log2.map_or(String::new(), |b| b.to_string());
            let ok = r.bound_ok.map_or(String::new(), |b| b.to_string());
            let vac = r.bound_vacuous.map_or(String::new(), |b| b.to_string());
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.region,
                r.area,
                r.volume,
                fmt_f64(r.alpha),
                fmt_f64(r.entropy_nats),
                fmt_f64(r.entropy_bits),
                r.rank,
                bound,
                ok,
                vac,
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Rényi entropies, ranks and bound columns for every `(region, alpha)`.
pub fn entropy_sweep(
    state: &DenseState,
    regions: &[Region],
    alphas: &[f64],
    context: &BoundContext<'_>,
) -> Result<EntropyReport> {
    if !state.is_normalized() {
        return Err(Error::Precondition(
            "entropy sweep needs a normalized state".into(),
        ));
    }
    for &alpha in alphas {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::Input(format!("alpha must be positive, got {alpha}")));
        }
    }
    let n = state.n_sites();
    let per_region: Vec<(SchmidtSpectrum, Option<(usize, usize)>)> = regions
        .par_iter()
        .map(|region| {
            let spectrum = state.schmidt(&region.part)?;
            let bound = context.bound_for(&region.part)?;
            Ok((spectrum, bound))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(regions.len() * alphas.len());
    for (region, (spectrum, bound)) in regions.iter().zip(per_region) {
        let rank = spectrum.numerical_rank(DEFAULT_RANK_TOL);
        for &alpha in alphas {
            let entropy = spectrum.renyi_entropy(alpha)?;
            let (bound_log2, bound_ok, bound_vacuous) = match bound {
                None => (None, None, None),
                Some((log2, b_sites)) => {
                    let rank_ok = RankBound::from_log2(log2).admits_rank(rank);
                    let entropy_ok = entropy <= log2 as f64 * std::f64::consts::LN_2 + BOUND_SLACK;
                    (
                        Some(log2),
                        Some(rank_ok && entropy_ok),
                        Some(2 * b_sites >= n),
                    )
                }
            };
            rows.push(EntropyRow {
                region: region.label.clone(),
                area: region.area,
                volume: region.volume,
                alpha,
                entropy_nats: entropy,
                entropy_bits: entropy / std::f64::consts::LN_2,
                rank,
                rank_bound_log2: bound_log2,
                bound_ok,
                bound_vacuous,
            });
        }
    }
    Ok(EntropyReport { rows })
}

/// One region's verdict in an area-law check.
#[derive(Debug, Clone, Serialize)]
pub struct AreaLawRow {
    pub region: String,
    pub area: usize,
    pub boundary_sites: usize,
    pub rank: usize,
    pub rank_bound_log2: usize,
    pub max_entropy_nats: f64,
    /// Empirical ratio `|B| / Area(A)`.
    pub r_empirical: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AreaLawReport {
    pub rows: Vec<AreaLawRow>,
    pub all_pass: bool,
}

/// Checks `rank <= 2^|B|` and `S_alpha <= |B| ln 2` for every region and
/// every requested alpha, and reports the empirical `R = |B| / Area(A)`.
pub fn area_law_check(
    state: &DenseState,
    context: &BoundContext<'_>,
    regions: &[Region],
    alphas: &[f64],
) -> Result<AreaLawReport> {
    if matches!(context, BoundContext::None) {
        return Err(Error::Config(
            "area-law check needs a cover or DBM context".into(),
        ));
    }
    let report = entropy_sweep(state, regions, alphas, context)?;
    let mut rows: Vec<AreaLawRow> = Vec::with_capacity(regions.len());
    for (region, chunk) in regions.iter().zip(report.rows.chunks(alphas.len())) {
        let first = &chunk[0];
        let log2 = first.rank_bound_log2.expect("context supplied");
        let max_entropy = chunk.iter().map(|r| r.entropy_nats).fold(0.0, f64::max);
        let pass = chunk.iter().all(|r| r.bound_ok.unwrap_or(false));
        let (_, boundary_sites) = context.bound_for(&region.part)?.expect("context supplied");
        rows.push(AreaLawRow {
            region: first.region.clone(),
            area: first.area,
            boundary_sites,
            rank: first.rank,
            rank_bound_log2: log2,
            max_entropy_nats: max_entropy,
            r_empirical: if first.area > 0 {
                boundary_sites as f64 / first.area as f64
            } else {
                f64::INFINITY
            },
            pass,
        });
    }
    let all_pass = rows.iter().all(|r| r.pass);
    Ok(AreaLawReport { rows, all_pass })
}

/// The printed seven-term topological entropy combination
/// `S(AB) + S(CB) + S(AC) - S(A) - S(B) - S(C) - S(D)` with `D = A u B u C`,
/// at Rényi index `alpha` (von Neumann by default).
pub fn topological_entropy(
    state: &DenseState,
    region_a: &[usize],
    region_b: &[usize],
    region_c: &[usize],
    alpha: f64,
) -> Result<f64> {
    let n = state.n_sites();
    let a: BTreeSet<usize> = region_a.iter().copied().collect();
    let b: BTreeSet<usize> = region_b.iter().copied().collect();
    let c: BTreeSet<usize> = region_c.iter().copied().collect();
    if !(a.is_disjoint(&b) && a.is_disjoint(&c) && b.is_disjoint(&c)) {
        return Err(Error::Input(
            "fan regions A, B, C must be pairwise disjoint".into(),
        ));
    }
    if a.is_empty() || b.is_empty() || c.is_empty() {
        return Err(Error::Input("fan regions A, B, C must be nonempty".into()));
    }
    let entropy = |sites: Vec<usize>| -> Result<f64> {
        let part = Bipartition::new(n, sites)?;
        state.schmidt(&part)?.renyi_entropy(alpha)
    };
    let union = |xs: &BTreeSet<usize>, ys: &BTreeSet<usize>| -> Vec<usize> {
        xs.union(ys).copied().collect()
    };
    let s_a = entropy(a.iter().copied().collect())?;
    let s_b = entropy(b.iter().copied().collect())?;
    let s_c = entropy(c.iter().copied().collect())?;
    let s_ab = entropy(union(&a, &b))?;
    let s_cb = entropy(union(&c, &b))?;
    let s_ac = entropy(union(&a, &c))?;
    let d: BTreeSet<usize> = a.union(&b).chain(c.iter()).copied().collect();
    let s_d = entropy(d.into_iter().collect())?;
    Ok(s_ab + s_cb + s_ac - s_a - s_b - s_c - s_d)
}

/// Both sign conventions of the topological entropy.
#[derive(Debug, Clone, Serialize)]
pub struct TopologicalEntropyReport {
    /// The seven-term combination exactly as printed.
    pub s_top: f64,
    /// The negated value, matching the Kitaev-Preskill convention.
    pub kitaev_preskill_convention: f64,
    pub alpha: f64,
}

pub fn topological_entropy_report(
    state: &DenseState,
    region_a: &[usize],
    region_b: &[usize],
    region_c: &[usize],
    alpha: f64,
) -> Result<TopologicalEntropyReport> {
    let s_top = topological_entropy(state, region_a, region_b, region_c, alpha)?;
    Ok(TopologicalEntropyReport {
        s_top,
        kitaev_preskill_convention: -s_top,
        alpha,
    })
}

/// The frozen three-fan partition used for the toric code: the disc D is
/// the union of the plaquettes (0,0), (1,0) and (0,1), split into fan A =
/// all edges of plaquette (0,0), fan B = remaining edges of (1,0), fan C =
/// remaining edges of (0,1). The three fans meet at vertex (1,1). Needs
/// `l >= 3`: on the 2x2 torus the disc would cover every edge.
pub fn toric_fan_partition(l: usize) -> Result<[Vec<usize>; 3]> {
    if l < 3 {
        return Err(Error::Input(
            "fan partition needs l >= 3 (the three-plaquette disc covers the whole \
             l = 2 torus)"
                .into(),
        ));
    }
    let faces = [(0usize, 0usize), (1, 0), (0, 1)];
    let mut taken = BTreeSet::new();
    let mut fans: [Vec<usize>; 3] = Default::default();
    for (fan, &(x, y)) in faces.iter().enumerate() {
        for e in toric::plaquette_boundary(l, x, y) {
            if taken.insert(e) {
                fans[fan].push(e);
            }
        }
        fans[fan].sort_unstable();
    }
    Ok(fans)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Boundary;
    use crate::quasi_product::{cluster_state_1d, graph_state};
    use crate::state::{evaluate_all, Alphabet};
    use num_complex::Complex64;

    #[test]
    fn contiguous_family_counts() {
        let g = LatticeGeometry::chain(8, Boundary::Periodic).unwrap();
        let regions = make_regions(&g, &RegionFamily::Contiguous { start: 0 }).unwrap();
        assert_eq!(regions.len(), 7);
        assert_eq!(regions[0].volume, 1);
        assert_eq!(regions[6].volume, 7);
    }

    #[test]
    fn rect_region_area_on_3x3() {
        let g = LatticeGeometry::square(3, 3, Boundary::Periodic).unwrap();
        let regions = make_regions(
            &g,
            &RegionFamily::Rect {
                width: 2,
                height: 2,
            },
        )
        .unwrap();
        let r00 = regions.iter().find(|r| r.label == "rect(0,0,2,2)").unwrap();
        assert_eq!(r00.volume, 4);
        // Brute force: every site of the 2x2 block touches the complement.
        assert_eq!(r00.area, 4);
    }

    #[test]
    fn full_lattice_region_is_rejected() {
        let g = LatticeGeometry::chain(4, Boundary::Periodic).unwrap();
        let err = make_regions(&g, &RegionFamily::Custom(vec![(0..4).collect()]));
        assert!(matches!(err, Err(Error::Input(_))));
        let err = make_regions(&g, &RegionFamily::Custom(vec![vec![]]));
        assert!(matches!(err, Err(Error::Input(_))));
    }

    #[test]
    fn product_state_sweep_is_flat_zero() {
        let g = LatticeGeometry::chain(4, Boundary::Periodic).unwrap();
        let state = evaluate_all(4, Alphabet::ZeroOne, 22, |cfg| {
            if cfg.index() == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::default()
            }
        })
        .unwrap()
        .normalize()
        .unwrap();
        let regions = make_regions(&g, &RegionFamily::Contiguous { start: 0 }).unwrap();
        let report =
            entropy_sweep(&state, &regions, &[0.5, 1.0, 2.0], &BoundContext::None).unwrap();
        for row in &report.rows {
            assert!(row.entropy_nats.abs() < 1e-12);
            assert_eq!(row.rank, 1);
        }
    }

    #[test]
    fn cluster_state_plateau_at_two_bits() {
        let cover = cluster_state_1d(8).unwrap();
        let state = cover.evaluate(22).unwrap().normalize().unwrap();
        let g = LatticeGeometry::chain(8, Boundary::Periodic).unwrap();
        let regions: Vec<Region> = make_regions(&g, &RegionFamily::Contiguous { start: 0 })
            .unwrap()
            .into_iter()
            .filter(|r| (2..=6).contains(&r.volume))
            .collect();
        let report = entropy_sweep(&state, &regions, &[2.0], &BoundContext::Cover(&cover)).unwrap();
        for row in &report.rows {
            assert!(
                (row.entropy_nats - 2.0 * std::f64::consts::LN_2).abs() < 1e-9,
                "length {} gave {}",
                row.volume,
                row.entropy_nats
            );
            assert_eq!(row.bound_ok, Some(true));
        }
    }

    #[test]
    fn area_law_check_passes_for_cluster_state() {
        let cover = cluster_state_1d(8).unwrap();
        let state = cover.evaluate(22).unwrap().normalize().unwrap();
        let g = LatticeGeometry::chain(8, Boundary::Periodic).unwrap();
        let regions = make_regions(&g, &RegionFamily::ContiguousAll).unwrap();
        let report = area_law_check(
            &state,
            &BoundContext::Cover(&cover),
            &regions,
            &[0.5, 1.0, 2.0, 3.0],
        )
        .unwrap();
        assert!(report.all_pass);
    }

    #[test]
    fn area_law_check_requires_context() {
        let cover = cluster_state_1d(4).unwrap();
        let state = cover.evaluate(22).unwrap().normalize().unwrap();
        let g = LatticeGeometry::chain(4, Boundary::Periodic).unwrap();
        let regions = make_regions(&g, &RegionFamily::Contiguous { start: 0 }).unwrap();
        let err = area_law_check(&state, &BoundContext::None, &regions, &[1.0]);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn topological_entropy_of_product_state_vanishes() {
        let state = evaluate_all(6, Alphabet::ZeroOne, 22, |_| Complex64::new(1.0, 0.0))
            .unwrap()
            .normalize()
            .unwrap();
        let s = topological_entropy(&state, &[0, 1], &[2, 3], &[4], 1.0).unwrap();
        assert!(s.abs() < 1e-10);
    }

    #[test]
    fn topological_entropy_rejects_overlap() {
        let state = evaluate_all(4, Alphabet::ZeroOne, 22, |_| Complex64::new(1.0, 0.0))
            .unwrap()
            .normalize()
            .unwrap();
        assert!(topological_entropy(&state, &[0, 1], &[1, 2], &[3], 1.0).is_err());
    }

    #[test]
    fn topological_entropy_symmetric_under_fan_relabeling() {
        // Tree graph state: no topological order, S_top = 0, and the
        // combination is invariant under permuting the three fans.
        let cover = graph_state(&[(0, 1), (1, 2), (1, 3), (3, 4), (3, 5)], 6).unwrap();
        let state = cover.evaluate(22).unwrap().normalize().unwrap();
        let (a, b, c) = (vec![0, 1], vec![2, 3], vec![4]);
        let base = topological_entropy(&state, &a, &b, &c, 1.0).unwrap();
        assert!(
            base.abs() < 1e-9,
            "trees carry no topological order, got {base}"
        );
        for (x, y, z) in [(&b, &a, &c), (&c, &b, &a), (&b, &c, &a)] {
            let s = topological_entropy(&state, x, y, z, 1.0).unwrap();
            assert!((s - base).abs() < 1e-9);
        }
    }

    #[test]
    fn fan_partition_is_disjoint_and_sized() {
        let [a, b, c] = toric_fan_partition(3).unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(b.len(), 3);
        assert_eq!(c.len(), 3);
        let mut all: Vec<usize> = a.iter().chain(&b).chain(&c).copied().collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 10);
    }

    #[test]
    fn dense_network_cover_bounds_are_flagged_vacuous() {
        use crate::neural::{random_rbm, Locality};
        let spec = random_rbm(8, Locality::Dense, 3, 0.4);
        let cover = spec.to_cluster_cover().unwrap();
        let state = spec.evaluate(22).unwrap().normalize().unwrap();
        let g = LatticeGeometry::chain(8, Boundary::Periodic).unwrap();
        let regions: Vec<Region> = make_regions(&g, &RegionFamily::Contiguous { start: 0 })
            .unwrap()
            .into_iter()
            .filter(|r| r.volume == 4)
            .collect();
        let report = entropy_sweep(&state, &regions, &[2.0], &BoundContext::Cover(&cover)).unwrap();
        assert!(report.all_bounds_ok());
        for row in &report.rows {
            // A dense cover makes every cluster a boundary cluster: the
            // bound is satisfied but meaningless, and flagged as such.
            assert_eq!(row.bound_vacuous, Some(true));
            assert_eq!(row.bound_ok, Some(true));
            assert_eq!(row.rank_bound_log2, Some(8));
        }
    }

    #[test]
    fn csv_has_expected_shape() {
        let cover = cluster_state_1d(4).unwrap();
        let state = cover.evaluate(22).unwrap().normalize().unwrap();
        let g = LatticeGeometry::chain(4, Boundary::Periodic).unwrap();
        let regions = make_regions(&g, &RegionFamily::Contiguous { start: 0 }).unwrap();
        let report = entropy_sweep(&state, &regions, &[2.0], &BoundContext::Cover(&cover)).unwrap();
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), EntropyReport::CSV_HEADER);
        assert_eq!(csv.lines().count(), 1 + report.rows.len());
    }
}
