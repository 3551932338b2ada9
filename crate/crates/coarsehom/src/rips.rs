//! Rips complexes of a space at a chain level, their filtrations, induced
//! simplicial maps, and window/collar pairs for locally finite approximation.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::One;

use crate::complexes::{ComplexKind, DegreeData, GradedComplex, Tuple};
use crate::error::{CoarseError, Result};
use crate::linalg::{IMat, Ring};
use crate::space::{penumbra, CoarseSpace, Entourage, PointId, SubsetRef};

/// Simplices per dimension as sorted vertex lists, face-closed, in
/// lexicographic order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SimplicialComplex {
    pub dims: Vec<Vec<Vec<PointId>>>,
    pub max_dim: usize,
}

impl SimplicialComplex {
    pub fn simplex_count(&self, dim: usize) -> usize {
        self.dims.get(dim).map_or(0, Vec::len)
    }

    pub fn counts(&self) -> Vec<usize> {
        self.dims.iter().map(Vec::len).collect()
    }

    pub fn contains(&self, simplex: &[PointId]) -> bool {
        let d = simplex.len() - 1;
        self.dims
            .get(d)
            .map_or(false, |list| list.binary_search_by(|s| s.as_slice().cmp(simplex)).is_ok())
    }

    /// Every face of every stored simplex is stored.
    pub fn is_face_closed(&self) -> bool {
        for d in 1..self.dims.len() {
            for s in &self.dims[d] {
                for i in 0..s.len() {
                    let mut face = s.clone();
                    face.remove(i);
                    if !self.contains(&face) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Full subcomplex on a vertex subset.
    pub fn restrict(&self, keep: &BTreeSet<PointId>) -> SimplicialComplex {
        let dims: Vec<Vec<Vec<PointId>>> = self
            .dims
            .iter()
            .map(|list| {
                list.iter()
                    .filter(|s| s.iter().all(|v| keep.contains(v)))
                    .cloned()
                    .collect()
            })
            .collect();
        SimplicialComplex { max_dim: self.max_dim, dims }
    }

    /// Is the complex the full simplex on its vertex set (up to max_dim)?
    pub fn is_full_simplex(&self) -> bool {
        let n = self.simplex_count(0);
        for d in 0..=self.max_dim.min(n.saturating_sub(1)) {
            let expected = binomial(n, d + 1);
            if self.simplex_count(d) != expected {
                return false;
            }
        }
        true
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Cliques of `E ∖ Diag` on a vertex subset, dimension-capped.
///
/// Enumeration follows ascending vertex labels: a `k`-simplex is recorded as
/// its sorted vertex list, and extensions always use larger vertices, so each
/// clique appears once.
pub fn build_rips(
    space: &CoarseSpace,
    vertices: &SubsetRef,
    e: &Entourage,
    max_dim: usize,
    cap: usize,
) -> Result<SimplicialComplex> {
    if !e.is_symmetric() || !e.contains_diagonal() {
        return Err(CoarseError::Unsupported("entourage must be normalized".into()));
    }
    if let Some(&bad) = vertices.members.iter().find(|v| v.idx() >= space.len()) {
        return Err(CoarseError::PointOutOfRange(bad.idx(), space.len()));
    }
    let verts: Vec<PointId> = vertices.members.iter().copied().collect();
    let mut dims: Vec<Vec<Vec<PointId>>> = vec![Vec::new(); max_dim + 1];
    dims[0] = verts.iter().map(|&v| vec![v]).collect();
    let mut total = dims[0].len();
    for d in 1..=max_dim {
        let mut next = Vec::new();
        for s in &dims[d - 1] {
            let last = *s.last().unwrap();
            for &v in verts.iter().filter(|&&v| v > last) {
                if s.iter().all(|&u| e.contains(u, v)) {
                    let mut bigger = s.clone();
                    bigger.push(v);
                    next.push(bigger);
                    total += 1;
                    if total > cap {
                        return Err(CoarseError::CapExceeded(format!(
                            "simplex count exceeds cap {cap}"
                        )));
                    }
                }
            }
        }
        next.sort();
        dims[d] = next;
    }
    Ok(SimplicialComplex { dims, max_dim })
}

/// Rips complexes at every chain level, with inclusions by monotonicity.
#[derive(Clone, Debug)]
pub struct RipsFiltration {
    pub levels: Vec<SimplicialComplex>,
}

pub fn build_filtration(
    space: &CoarseSpace,
    vertices: &SubsetRef,
    max_dim: usize,
    cap: usize,
) -> Result<RipsFiltration> {
    let mut levels = Vec::with_capacity(space.depth() + 1);
    for n in 0..=space.depth() {
        levels.push(build_rips(space, vertices, space.chain().level(n), max_dim, cap)?);
    }
    Ok(RipsFiltration { levels })
}

impl RipsFiltration {
    pub fn is_monotone(&self) -> bool {
        self.levels.windows(2).all(|w| {
            w[0].dims.iter().enumerate().all(|(_d, list)| {
                list.iter().all(|s| w[1].contains(s))
            })
        })
    }
}

/// A simplicial map induced by a vertex map with a controlledness witness:
/// images with repeated vertices die at chain level, others carry the parity
/// of the sorting permutation.
#[derive(Clone, Debug)]
pub struct SimplicialMap {
    pub vertex_map: Vec<PointId>,
    pub source_level: usize,
    pub target_level: usize,
}

impl SimplicialMap {
    /// Image of a simplex: `None` when degenerate, else (sorted image, sign).
    pub fn image_of(&self, simplex: &[PointId]) -> Option<(Vec<PointId>, i64)> {
        let imgs: Vec<PointId> = simplex.iter().map(|&v| self.vertex_map[v.idx()]).collect();
        let mut sorted = imgs.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        // parity of the permutation that sorts the image sequence
        let mut inversions = 0usize;
        for i in 0..imgs.len() {
            for j in i + 1..imgs.len() {
                if imgs[i] > imgs[j] {
                    inversions += 1;
                }
            }
        }
        Some((sorted, if inversions % 2 == 0 { 1 } else { -1 }))
    }

    /// Chain matrix in one degree between two complexes.
    pub fn chain_matrix(
        &self,
        dim: usize,
        source: &SimplicialComplex,
        target: &SimplicialComplex,
    ) -> Result<IMat> {
        let src = source.dims.get(dim).cloned().unwrap_or_default();
        let tgt = target.dims.get(dim).cloned().unwrap_or_default();
        let index: BTreeMap<&Vec<PointId>, usize> =
            tgt.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut m = IMat::zeros(tgt.len(), src.len());
        for (j, s) in src.iter().enumerate() {
            if let Some((img, sign)) = self.image_of(s) {
                let Some(&i) = index.get(&img) else {
                    return Err(CoarseError::WitnessMissing(self.source_level));
                };
                m.set(i, j, BigInt::from(sign));
            }
        }
        Ok(m)
    }
}

/// Induce a simplicial map from a controlled vertex map. The witness level
/// `m` must satisfy `(f×f)(E_n) ⊆ F_m`; membership of every image simplex in
/// the target complex is verified.
pub fn induced_map(
    vertex_map: &[PointId],
    source_level: usize,
    witness_level: usize,
    source: &SimplicialComplex,
    target: &SimplicialComplex,
) -> Result<SimplicialMap> {
    let map = SimplicialMap {
        vertex_map: vertex_map.to_vec(),
        source_level,
        target_level: witness_level,
    };
    for list in &source.dims {
        for s in list {
            if let Some((img, _)) = map.image_of(s) {
                if !target.contains(&img) {
                    return Err(CoarseError::WitnessMissing(source_level));
                }
            }
        }
    }
    Ok(map)
}

/// A window and its collar: the collar is the part of the window whose
/// `E_r`-ball reaches outside (computed in the ambient presentation, which
/// is how window families see their regenerated surroundings).
#[derive(Clone, Debug)]
pub struct WindowPair {
    pub window: SubsetRef,
    pub collar: SubsetRef,
}

pub fn window_pair(space: &CoarseSpace, w: &SubsetRef, collar_width: usize) -> Result<WindowPair> {
    if collar_width > space.depth() {
        return Err(CoarseError::CollarTooWide(collar_width, space.depth()));
    }
    let e = space.chain().level(collar_width);
    let mut collar = BTreeSet::new();
    for &x in &w.members {
        let ball = penumbra(e, &BTreeSet::from([x]));
        if !ball.is_subset(&w.members) {
            collar.insert(x);
        }
    }
    Ok(WindowPair { window: w.clone(), collar: SubsetRef { members: collar } })
}

/// Simplicial (co)chain complex over a ring, optionally killing all simplices
/// inside a vertex set (relative complex / compact supports).
pub fn simplicial_complex_matrices(
    complex: &SimplicialComplex,
    ring: Ring,
    kill: Option<&BTreeSet<PointId>>,
    kind: ComplexKind,
) -> GradedComplex {
    let p_max = complex.max_dim;
    let kept: Vec<Vec<Vec<PointId>>> = (0..=p_max)
        .map(|d| {
            complex
                .dims
                .get(d)
                .map(|list| {
                    list.iter()
                        .filter(|s| kill.map_or(true, |k| !s.iter().all(|v| k.contains(v))))
                        .cloned()
                        .collect()
                })
                .unwrap_or_default()
        })
        .collect();
    let index: Vec<BTreeMap<&Vec<PointId>, usize>> = kept
        .iter()
        .map(|list| list.iter().enumerate().map(|(i, s)| (s, i)).collect())
        .collect();
    let mut boundaries = Vec::with_capacity(p_max + 1);
    boundaries.push(IMat::zeros(0, kept[0].len()));
    for d in 1..=p_max {
        let mut m = IMat::zeros(kept[d - 1].len(), kept[d].len());
        for (j, s) in kept[d].iter().enumerate() {
            for i in 0..s.len() {
                let mut face = s.clone();
                face.remove(i);
                if let Some(&fi) = index[d - 1].get(&face) {
                    let sign = if i % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                    m.set(fi, j, sign);
                }
            }
        }
        boundaries.push(m);
    }
    let degrees: Vec<DegreeData> = kept
        .iter()
        .map(|list| DegreeData {
            dim: list.len(),
            tuples: Some(list.iter().cloned().map(|s| s as Tuple).collect()),
            ambient_tuples: None,
        })
        .collect();
    let diffs = match kind {
        ComplexKind::Chain => boundaries,
        ComplexKind::Cochain => {
            let mut diffs = Vec::with_capacity(p_max + 1);
            for d in 0..=p_max {
                if d < p_max {
                    diffs.push(boundaries[d + 1].transpose());
                } else {
                    diffs.push(IMat::zeros(0, kept[d].len()));
                }
            }
            diffs
        }
    };
    let n = diffs.len();
    GradedComplex {
        ring,
        kind,
        coeff_rank: 1,
        level: 0,
        p_max,
        degrees,
        diffs,
        relations: vec![None; n],
        embeddings: vec![None; n],
        coinvariant_warning: false,
    }
}

/// OFF export: combinatorial, vertex `i` is placed at `(i, 0, 0)`; faces are
/// the triangles.
pub fn to_off(complex: &SimplicialComplex) -> String {
    let nv = complex.simplex_count(0);
    let triangles = complex.dims.get(2).cloned().unwrap_or_default();
    let mut out = String::from("OFF\n");
    out.push_str(&format!("{} {} 0\n", nv, triangles.len()));
    for i in 0..nv {
        out.push_str(&format!("{i}.0 0.0 0.0\n"));
    }
    for t in &triangles {
        out.push_str(&format!("3 {} {} {}\n", t[0].0, t[1].0, t[2].0));
    }
    out
}

/// DOT export of the 1-skeleton.
pub fn to_dot(complex: &SimplicialComplex, labels: &dyn Fn(PointId) -> String) -> String {
    let mut out = String::from("graph rips {\n");
    for v in complex.dims.first().into_iter().flatten() {
        out.push_str(&format!("  \"{}\";\n", labels(v[0])));
    }
    for e in complex.dims.get(1).into_iter().flatten() {
        out.push_str(&format!("  \"{}\" -- \"{}\";\n", labels(e[0]), labels(e[1])));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::space::tests::line;
    use crate::space::Ambient;

    #[test]
    fn path_and_triangle() {
        let s = line(0, 2, &[0.0, 1.0, 2.0]);
        let all = s.subset(s.points()).unwrap();
        let path = build_rips(&s, &all, s.chain().level(1), 2, 1000).unwrap();
        assert_eq!(path.counts(), vec![3, 2, 0]);
        let full = build_rips(&s, &all, s.chain().level(2), 2, 1000).unwrap();
        assert_eq!(full.counts(), vec![3, 3, 1]);
        assert!(full.is_full_simplex());
        assert!(path.is_face_closed() && full.is_face_closed());
    }

    #[test]
    fn interval_tetrahedra_count() {
        let s = line(0, 20, &[0.0, 3.0]);
        let all = s.subset(s.points()).unwrap();
        let cx = build_rips(&s, &all, s.chain().level(1), 3, 100_000).unwrap();
        // 4-cliques within diameter 3 are runs of four consecutive integers
        assert_eq!(cx.simplex_count(3), 18);
        // triangle count against brute force enumeration
        let pts: Vec<PointId> = s.points().collect();
        let e = s.chain().level(1);
        let mut brute = 0;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                for k in j + 1..pts.len() {
                    if e.contains(pts[i], pts[j])
                        && e.contains(pts[i], pts[k])
                        && e.contains(pts[j], pts[k])
                    {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(cx.simplex_count(2), brute);
    }

    #[test]
    fn clique_cap_guard() {
        let s = line(0, 20, &[0.0, 20.0]);
        let all = s.subset(s.points()).unwrap();
        assert!(matches!(
            build_rips(&s, &all, s.chain().level(1), 3, 50),
            Err(CoarseError::CapExceeded(_))
        ));
    }

    #[test]
    fn filtration_is_monotone_and_matches_counts() {
        let s = line(0, 6, &[0.0, 1.0, 2.0, 3.0]);
        let all = s.subset(s.points()).unwrap();
        let filt = build_filtration(&s, &all, 3, 100_000).unwrap();
        assert!(filt.is_monotone());
        for (n, cx) in filt.levels.iter().enumerate() {
            let direct = build_rips(&s, &all, s.chain().level(n), 3, 100_000).unwrap();
            assert_eq!(cx, &direct);
        }
        // single point: constant filtration
        let pt = line(0, 0, &[0.0, 1.0]);
        let allp = pt.subset(pt.points()).unwrap();
        let f = build_filtration(&pt, &allp, 2, 10).unwrap();
        assert!(f.levels.iter().all(|c| c.counts() == vec![1, 0, 0]));
    }

    #[test]
    fn edge_appears_at_its_distance_level() {
        let labels = vec!["a".to_string(), "b".to_string()];
        let dist = vec![vec![0.0, 2.0], vec![2.0, 0.0]];
        let s = crate::space::CoarseSpace::from_metric(labels, &dist, &[0.0, 1.0, 2.0], Ambient::Finite)
            .unwrap();
        let all = s.subset(s.points()).unwrap();
        let filt = build_filtration(&s, &all, 1, 100).unwrap();
        assert_eq!(filt.levels[0].simplex_count(1), 0);
        assert_eq!(filt.levels[1].simplex_count(1), 0);
        assert_eq!(filt.levels[2].simplex_count(1), 1);
    }

    #[test]
    fn induced_identity_and_collapse() {
        let s = line(0, 2, &[0.0, 1.0, 2.0]);
        let all = s.subset(s.points()).unwrap();
        let cx = build_rips(&s, &all, s.chain().level(1), 2, 100).unwrap();
        let ids: Vec<PointId> = s.points().collect();
        let idm = induced_map(&ids, 1, 1, &cx, &cx).unwrap();
        let m1 = idm.chain_matrix(1, &cx, &cx).unwrap();
        assert_eq!(m1, IMat::identity(2));
        // collapse 1 -> 0: the edge (0,1) degenerates to zero, (1,2) lands on
        // the level-2 edge (0,2)
        let cx2 = build_rips(&s, &all, s.chain().level(2), 2, 100).unwrap();
        let collapse = vec![PointId(0), PointId(0), PointId(2)];
        let cm = induced_map(&collapse, 1, 2, &cx, &cx2).unwrap();
        let m = cm.chain_matrix(1, &cx, &cx2).unwrap();
        let e01 = cx.dims[1].binary_search(&vec![PointId(0), PointId(1)]).unwrap();
        let e12 = cx.dims[1].binary_search(&vec![PointId(1), PointId(2)]).unwrap();
        let e02 = cx2.dims[1].binary_search(&vec![PointId(0), PointId(2)]).unwrap();
        assert!(m.column(e01).iter().all(num_traits::Zero::is_zero));
        assert_eq!(m.get(e02, e12), &BigInt::from(1));
    }

    #[test]
    fn induced_map_respects_orientation_sign() {
        let s = line(0, 3, &[0.0, 1.0, 2.0, 3.0]);
        let all = s.subset(s.points()).unwrap();
        let cx1 = build_rips(&s, &all, s.chain().level(1), 2, 1000).unwrap();
        let cx3 = build_rips(&s, &all, s.chain().level(3), 2, 1000).unwrap();
        // reversal x -> 3-x is an isometry; edges flip orientation
        let rev: Vec<PointId> = s
            .points()
            .map(|p| {
                let v: i64 = s.label(p).parse().unwrap();
                s.index_of_label(&(3 - v).to_string()).unwrap()
            })
            .collect();
        let f = induced_map(&rev, 1, 1, &cx1, &cx3).unwrap();
        let m = f.chain_matrix(1, &cx1, &cx3).unwrap();
        // edge (0,1) -> (3,2): sorted (2,3) with one inversion
        let e01 = cx1.dims[1].binary_search(&vec![PointId(0), PointId(1)]).unwrap();
        let e23 = cx3.dims[1].binary_search(&vec![PointId(2), PointId(3)]).unwrap();
        assert_eq!(m.get(e23, e01), &BigInt::from(-1));
    }

    #[test]
    fn functoriality_of_induced_maps() {
        let s = line(0, 4, &(0..=4).map(f64::from).collect::<Vec<_>>());
        let all = s.subset(s.points()).unwrap();
        let cx1 = build_rips(&s, &all, s.chain().level(1), 2, 1000).unwrap();
        let cx2 = build_rips(&s, &all, s.chain().level(2), 2, 1000).unwrap();
        let cx4 = build_rips(&s, &all, s.chain().level(4), 2, 1000).unwrap();
        let clamp = |shift: i64| -> Vec<PointId> {
            s.points()
                .map(|p| {
                    let v: i64 = s.label(p).parse().unwrap();
                    s.index_of_label(&(v + shift).clamp(0, 4).to_string()).unwrap()
                })
                .collect()
        };
        let f_verts = clamp(1);
        let g_verts = clamp(2);
        let f = induced_map(&f_verts, 1, 2, &cx1, &cx2).unwrap();
        let g = induced_map(&g_verts, 2, 4, &cx2, &cx4).unwrap();
        let gf_verts: Vec<PointId> = f_verts.iter().map(|&p| g_verts[p.idx()]).collect();
        let gf = induced_map(&gf_verts, 1, 4, &cx1, &cx4).unwrap();
        for dim in 0..=2 {
            let lhs = gf.chain_matrix(dim, &cx1, &cx4).unwrap();
            let rhs = g
                .chain_matrix(dim, &cx2, &cx4)
                .unwrap()
                .mul(&f.chain_matrix(dim, &cx1, &cx2).unwrap());
            assert_eq!(lhs, rhs, "functoriality fails in dim {dim}");
        }
    }

    #[test]
    fn window_pair_collars() {
        // finite space: balls stay inside, no collar
        let s = line(-5, 5, &[0.0, 1.0, 2.0]);
        let w = s.subset(s.points()).unwrap();
        let pair = window_pair(&s, &w, 1).unwrap();
        assert!(pair.collar.is_empty());
        // a window strictly inside a larger presentation grows a collar
        let big = line(-7, 7, &[0.0, 1.0, 2.0]);
        let w = big.subset_where(|l| l.parse::<i64>().unwrap().abs() <= 5);
        let pair = window_pair(&big, &w, 2).unwrap();
        let labels: Vec<&str> = pair.collar.members.iter().map(|&p| big.label(p)).collect();
        assert_eq!(labels, vec!["-5", "-4", "4", "5"]);
        // zero width: no collar
        let pair0 = window_pair(&big, &w, 0).unwrap();
        assert!(pair0.collar.is_empty());
        assert!(matches!(window_pair(&big, &w, 9), Err(CoarseError::CollarTooWide(..))));
    }

    #[test]
    fn simplicial_matrices_square_to_zero() {
        let s = line(0, 6, &[0.0, 2.0]);
        let all = s.subset(s.points()).unwrap();
        let cx = build_rips(&s, &all, s.chain().level(1), 3, 10_000).unwrap();
        let gc = simplicial_complex_matrices(&cx, Ring::Z, None, ComplexKind::Chain);
        for d in 2..=3 {
            assert!(gc.diffs[d - 1].mul(&gc.diffs[d]).is_zero());
        }
        let relset: BTreeSet<PointId> = [PointId(0), PointId(1)].into();
        let rel = simplicial_complex_matrices(&cx, Ring::Z, Some(&relset), ComplexKind::Chain);
        assert_eq!(rel.dim(0), gc.dim(0) - 2);
        for d in 2..=3 {
            assert!(rel.diffs[d - 1].mul(&rel.diffs[d]).is_zero());
        }
    }

    #[test]
    fn exports_have_expected_shape() {
        let s = line(0, 2, &[0.0, 2.0]);
        let all = s.subset(s.points()).unwrap();
        let cx = build_rips(&s, &all, s.chain().level(1), 2, 100).unwrap();
        let off = to_off(&cx);
        assert!(off.starts_with("OFF\n3 1 0"));
        let dot = to_dot(&cx, &|p| s.label(p).to_string());
        assert!(dot.contains("\"0\" -- \"1\""));
        assert!(dot.ends_with("}\n"));
    }
}
