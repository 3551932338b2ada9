//! Exact homology of assembled complexes, induced maps, long exact sequences,
//! Mayer–Vietoris assembly, and stabilization over towers.
//!
//! Over the integers everything runs through Smith normal form with
//! certificates; over the rationals and prime fields through exact
//! elimination. Presented complexes (with relation lattices) are handled by
//! the same quotient machinery.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::complexes::{
    assemble, AssembleSpec, CoefficientModule, ComplexKind, GradedComplex, Variant,
};
use crate::error::{CoarseError, Result};
use crate::linalg::group::{CoordVec, FQuotient, ZQuotient};
use crate::linalg::{
    exactness_at, kernel, reduce_lattice_columns, smith, solve, ExactnessReport, FMat, Field, Fp,
    GroupData, IMat, InducedMap, Ring, SnfWant, SparseVec,
};
use crate::space::{CoarseSpace, SubsetRef};

pub use crate::linalg::Snf;

/// Certified Smith normal form: transforms returned and re-verified.
pub struct SnfCertificate {
    pub snf: Snf,
    pub product_ok: bool,
    pub unimodular_ok: bool,
    pub divisibility_ok: bool,
}

impl SnfCertificate {
    pub fn ok(&self) -> bool {
        self.product_ok && self.unimodular_ok && self.divisibility_ok
    }
}

/// Smith normal form with a post-hoc certificate check.
pub fn smith_normal_form(m: &IMat) -> SnfCertificate {
    let snf = smith(m, SnfWant::all());
    let u = snf.u.as_ref().unwrap();
    let v = snf.v.as_ref().unwrap();
    let product_ok = u.mul(m).mul(v) == snf.s_matrix();
    let one = BigInt::from(1);
    let unimodular_ok = u.det().abs() == one && v.det().abs() == one;
    let divisibility_ok = snf
        .factors
        .windows(2)
        .all(|w| Zero::is_zero(&(&w[1] % &w[0])));
    SnfCertificate { snf, product_ok, unimodular_ok, divisibility_ok }
}

fn big_columns(m: &IMat) -> Vec<SparseVec> {
    (0..m.cols)
        .map(|j| {
            let mut s = SparseVec::new();
            for i in 0..m.rows {
                let v = m.get(i, j);
                if !Zero::is_zero(v) {
                    s.insert(i, v.clone());
                }
            }
            s
        })
        .collect()
}

/// Homology of `cx` in degree `p` (which must be strictly below `p_max`, so
/// the incoming differential is assembled).
pub fn homology_at(cx: &GradedComplex, p: usize) -> Result<GroupData> {
    if p >= cx.p_max {
        return Err(CoarseError::DegreeOutOfRange(p, cx.p_max.saturating_sub(1)));
    }
    let d_out = cx.boundary_out(p);
    let dim = cx.dim(p);
    let zero_in = IMat::zeros(dim, 0);
    let d_in = cx.boundary_in(p).unwrap_or(&zero_in);
    let l_here = cx.relations[p].as_ref();
    let out_degree = match cx.kind {
        ComplexKind::Chain => p.checked_sub(1),
        ComplexKind::Cochain => Some(p + 1),
    };
    let l_out = out_degree.and_then(|d| cx.relations.get(d).and_then(Option::as_ref));

    match cx.ring {
        Ring::Z => {
            let k_basis: Vec<Vec<BigInt>> = match l_out {
                None => kernel(d_out),
                Some(l) => {
                    // {v : d_out v ∈ span L}: project the kernel of [d_out | L]
                    let mut aug = IMat::zeros(d_out.rows, dim + l.cols);
                    for i in 0..d_out.rows {
                        for j in 0..dim {
                            aug.set(i, j, d_out.get(i, j).clone());
                        }
                        for j in 0..l.cols {
                            aug.set(i, dim + j, l.get(i, j).clone());
                        }
                    }
                    let projected = kernel(&aug)
                        .into_iter()
                        .map(|k| {
                            let mut s = SparseVec::new();
                            for (i, v) in k.into_iter().take(dim).enumerate() {
                                if !Zero::is_zero(&v) {
                                    s.insert(i, v);
                                }
                            }
                            s
                        })
                        .filter(|s| !s.is_empty());
                    reduce_lattice_columns(projected)
                        .into_iter()
                        .map(|s| crate::linalg::int::sparse_to_dense(&s, dim))
                        .collect()
                }
            };
            let mut image = big_columns(d_in);
            if let Some(l) = l_here {
                image.extend(big_columns(l));
            }
            Ok(GroupData::Z(ZQuotient::new(dim, k_basis, image)))
        }
        Ring::Q => {
            let sample = <BigRational as Zero>::zero();
            homology_field(cx, p, d_out, d_in, l_here, l_out, sample)
        }
        Ring::Fp(pm) => {
            let sample = Fp::new(0, pm);
            homology_field(cx, p, d_out, d_in, l_here, l_out, sample)
        }
    }
}

fn homology_field<F: Field>(
    cx: &GradedComplex,
    p: usize,
    d_out: &IMat,
    d_in: &IMat,
    l_here: Option<&IMat>,
    l_out: Option<&IMat>,
    sample: F,
) -> Result<GroupData>
where
    GroupData: FromFQuotient<F>,
{
    let dim = cx.dim(p);
    let to_f = |m: &IMat| FMat::from_int(m.rows, m.cols, |i, j| m.get(i, j).clone(), &sample);
    let kernel_basis: Vec<Vec<F>> = match l_out {
        None => to_f(d_out).kernel(),
        Some(l) => {
            let mut aug = IMat::zeros(d_out.rows, dim + l.cols);
            for i in 0..d_out.rows {
                for j in 0..dim {
                    aug.set(i, j, d_out.get(i, j).clone());
                }
                for j in 0..l.cols {
                    aug.set(i, dim + j, l.get(i, j).clone());
                }
            }
            // project, then extract an independent spanning subset
            let projected: Vec<Vec<F>> = to_f(&aug)
                .kernel()
                .into_iter()
                .map(|k| k.into_iter().take(dim).collect())
                .collect();
            independent_subset(dim, projected, &sample)
        }
    };
    let mut image: Vec<Vec<F>> = (0..d_in.cols).map(|j| to_f(d_in).column(j)).collect();
    if let Some(l) = l_here {
        let lf = to_f(l);
        image.extend((0..l.cols).map(|j| lf.column(j)));
    }
    Ok(GroupData::from_quotient(FQuotient::new(dim, kernel_basis, image, sample)))
}

fn independent_subset<F: Field>(ambient: usize, vectors: Vec<Vec<F>>, sample: &F) -> Vec<Vec<F>> {
    let mut chosen: Vec<Vec<F>> = Vec::new();
    let mut rank = 0;
    for v in vectors {
        let mut cols = chosen.clone();
        cols.push(v.clone());
        let mut m = FMat::zeros(ambient, cols.len(), sample);
        for (j, c) in cols.iter().enumerate() {
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        if m.rank() > rank {
            rank += 1;
            chosen.push(v);
        }
    }
    chosen
}

pub trait FromFQuotient<F: Field> {
    fn from_quotient(q: FQuotient<F>) -> GroupData;
}
impl FromFQuotient<BigRational> for GroupData {
    fn from_quotient(q: FQuotient<BigRational>) -> GroupData {
        GroupData::Q(q)
    }
}
impl FromFQuotient<Fp> for GroupData {
    fn from_quotient(q: FQuotient<Fp>) -> GroupData {
        GroupData::Fp(q)
    }
}

/// The zero group over a ring.
pub fn zero_group(ring: Ring) -> GroupData {
    match ring {
        Ring::Z => GroupData::Z(ZQuotient::new(0, vec![], vec![])),
        Ring::Q => GroupData::Q(FQuotient::new(0, vec![], vec![], <BigRational as Zero>::zero())),
        Ring::Fp(p) => GroupData::Fp(FQuotient::new(0, vec![], vec![], Fp::new(0, p))),
    }
}

/// Homology in all degrees `0..max_degree` (exclusive upper bound must be
/// at most `p_max`).
pub fn homology_range(cx: &GradedComplex, max_degree: usize) -> Result<Vec<GroupData>> {
    (0..max_degree).map(|p| homology_at(cx, p)).collect()
}

// ---------------------------------------------------------------------------
// chain maps and induced maps

/// Verify that per-degree matrices commute with the differentials, modulo
/// relations when present.
pub fn verify_chain_map(
    source: &GradedComplex,
    target: &GradedComplex,
    mats: &[IMat],
) -> Result<()> {
    let degrees = mats.len();
    for p in 0..degrees {
        let (commutator, check_degree) = match source.kind {
            ComplexKind::Chain => {
                if p == 0 {
                    continue;
                }
                // M_{p-1} ∂ = ∂' M_p
                let lhs = mats[p - 1].mul(source.boundary_out(p));
                let rhs = target.boundary_out(p).mul(&mats[p]);
                (lhs.sub(&rhs), p - 1)
            }
            ComplexKind::Cochain => {
                if p + 1 >= degrees {
                    continue;
                }
                let lhs = mats[p + 1].mul(source.boundary_out(p));
                let rhs = target.boundary_out(p).mul(&mats[p]);
                (lhs.sub(&rhs), p + 1)
            }
        };
        if commutator.is_zero() {
            continue;
        }
        // allowed to differ by relations of the target degree
        match target.relations.get(check_degree).and_then(Option::as_ref) {
            None => return Err(CoarseError::NotChainMap(p)),
            Some(l) => {
                if !columns_in_span(&commutator, l, target.ring) {
                    return Err(CoarseError::NotChainMap(p));
                }
            }
        }
    }
    Ok(())
}

fn columns_in_span(m: &IMat, l: &IMat, ring: Ring) -> bool {
    match ring {
        Ring::Z => {
            let snf = smith(l, SnfWant::uv());
            (0..m.cols).all(|j| solve(&snf, &m.column(j)).is_some())
        }
        Ring::Q => {
            let sample = <BigRational as Zero>::zero();
            let lf = FMat::from_int(l.rows, l.cols, |i, j| l.get(i, j).clone(), &sample);
            (0..m.cols).all(|j| {
                let col: Vec<BigRational> = m
                    .column(j)
                    .into_iter()
                    .map(BigRational::from_integer)
                    .collect();
                lf.solve(&col).is_some()
            })
        }
        Ring::Fp(p) => {
            let sample = Fp::new(0, p);
            let lf = FMat::from_int(l.rows, l.cols, |i, j| l.get(i, j).clone(), &sample);
            (0..m.cols).all(|j| {
                let col: Vec<Fp> = m.column(j).iter().map(|v| Fp::from_big(v, p)).collect();
                lf.solve(&col).is_some()
            })
        }
    }
}

/// Induce a map on homology from the matrix of a chain map in one degree.
pub fn induced_on_homology(m: &IMat, src: &GroupData, tgt: &GroupData) -> Result<InducedMap> {
    let mut cols = Vec::with_capacity(src.num_gens());
    match (src, tgt) {
        (GroupData::Z(s), GroupData::Z(_)) => {
            for g in &s.gens {
                let img = m.mul_vec(g);
                let c = tgt
                    .coords_of_int(&img)
                    .ok_or(CoarseError::NotChainMap(0))?;
                cols.push(c);
            }
        }
        (GroupData::Q(s), GroupData::Q(t)) => {
            let sample = <BigRational as Zero>::zero();
            let mf = FMat::from_int(m.rows, m.cols, |i, j| m.get(i, j).clone(), &sample);
            for g in &s.gens {
                let img = mf.mul_vec(g);
                let c = t.coords_of(&img).ok_or(CoarseError::NotChainMap(0))?;
                cols.push(CoordVec::Q(c));
            }
        }
        (GroupData::Fp(s), GroupData::Fp(t)) => {
            let sample = t.sample();
            let mf = FMat::from_int(m.rows, m.cols, |i, j| m.get(i, j).clone(), &sample);
            for g in &s.gens {
                let img = mf.mul_vec(g);
                let c = t.coords_of(&img).ok_or(CoarseError::NotChainMap(0))?;
                cols.push(CoordVec::Fp(c));
            }
        }
        _ => return Err(CoarseError::Unsupported("ring mismatch".into())),
    }
    Ok(InducedMap::from_columns(src, tgt, cols))
}

/// The zero map `src → tgt`.
pub fn zero_map(src: &GroupData, tgt: &GroupData) -> InducedMap {
    let cols = (0..src.num_gens())
        .map(|_| match tgt {
            GroupData::Z(_) => CoordVec::Z(vec![BigInt::zero(); tgt.num_gens()]),
            GroupData::Q(_) => CoordVec::Q(vec![<BigRational as Zero>::zero(); tgt.num_gens()]),
            GroupData::Fp(q) => CoordVec::Fp(vec![Fp::new(0, q.sample().p); tgt.num_gens()]),
        })
        .collect();
    InducedMap::from_columns(src, tgt, cols)
}

/// Exactness at the middle of `A → B → C`, re-exported from the group layer.
pub fn check_exact(f: &InducedMap, g: &InducedMap) -> ExactnessReport {
    exactness_at(f, g)
}

// ---------------------------------------------------------------------------
// pairs: inclusion matrices and the connecting homomorphism

/// Matrix of the basis-level map sending each basis tuple of `from` to the
/// same tuple in `to` (zero when killed there). Complexes must share the
/// coefficient rank and kind.
pub fn tuple_inclusion_matrix(from: &GradedComplex, to: &GradedComplex, p: usize) -> Result<IMat> {
    let rank = from.coeff_rank;
    if rank != to.coeff_rank {
        return Err(CoarseError::Unsupported("coefficient ranks differ".into()));
    }
    let from_tuples = from.degrees[p]
        .tuples
        .as_ref()
        .ok_or_else(|| CoarseError::Unsupported("abstract basis has no tuples".into()))?;
    let mut m = IMat::zeros(to.dim(p), from.dim(p));
    for (j, t) in from_tuples.iter().enumerate() {
        if let Some(i) = to.basis_index(p, t, 0) {
            for k in 0..rank {
                m.set(i + k, j * rank + k, BigInt::from(1));
            }
        }
    }
    Ok(m)
}

/// Block-identity inclusion between two explicit tuple lists.
fn tuple_list_inclusion(
    from_tuples: &[crate::complexes::Tuple],
    to_tuples: &[crate::complexes::Tuple],
    rank: usize,
) -> IMat {
    use std::collections::BTreeMap;
    let index: BTreeMap<&crate::complexes::Tuple, usize> =
        to_tuples.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut m = IMat::zeros(to_tuples.len() * rank, from_tuples.len() * rank);
    for (j, t) in from_tuples.iter().enumerate() {
        if let Some(&i) = index.get(t) {
            for k in 0..rank {
                m.set(i * rank + k, j * rank + k, BigInt::from(1));
            }
        }
    }
    m
}

/// Sub/total/quotient complexes for a pair `(X, A)`, all rel an optional
/// collar: the sub complex lives on `A ∪ collar` rel collar so the short
/// exact sequence is exact on the nose.
pub struct PairComplexes {
    pub sub: GradedComplex,
    pub total: GradedComplex,
    pub quotient: GradedComplex,
}

#[allow(clippy::too_many_arguments)]
pub fn pair_complexes(
    space: &CoarseSpace,
    a: &SubsetRef,
    level: usize,
    p_max: usize,
    coeffs: &CoefficientModule,
    collar: Option<&SubsetRef>,
    variant: &Variant<'_>,
    kind: ComplexKind,
    cap: usize,
) -> Result<PairComplexes> {
    let empty = SubsetRef::empty();
    let collar_ref = collar.unwrap_or(&empty);
    let a_with_collar = a.union(collar_ref);
    let mk = |restrict: Option<&SubsetRef>, kill: Option<&SubsetRef>| -> Result<GradedComplex> {
        assemble(&AssembleSpec {
            space,
            level,
            p_max,
            coeffs,
            restrict_to: restrict,
            relative: kill,
            collar: if collar_ref.is_empty() { None } else { Some(collar_ref) },
            variant: variant.clone(),
            kind,
            cap,
        })
    };
    let sub = mk(Some(&a_with_collar), None)?;
    let total = mk(None, None)?;
    let quotient = mk(None, Some(a))?;
    Ok(PairComplexes { sub, total, quotient })
}

/// All homology groups and structure maps of the long exact sequence of a
/// pair, with an exactness verdict at every checkable node.
pub struct PairLes {
    pub ring: Ring,
    pub max_degree: usize,
    pub h_sub: Vec<GroupData>,
    pub h_total: Vec<GroupData>,
    pub h_quot: Vec<GroupData>,
    pub include: Vec<InducedMap>,
    pub project: Vec<InducedMap>,
    pub connect: Vec<InducedMap>,
    pub nodes: Vec<(String, ExactnessReport)>,
}

impl PairLes {
    pub fn all_exact(&self) -> bool {
        self.nodes.iter().all(|(_, r)| r.exact)
    }
}

/// Assemble the LES of a pair of chain complexes (homology direction).
pub fn les_of_pair(pc: &PairComplexes, max_degree: usize) -> Result<PairLes> {
    if !matches!(pc.total.kind, ComplexKind::Chain) {
        return Err(CoarseError::Unsupported("homology LES needs chain complexes".into()));
    }
    let ring = pc.total.ring;
    let h_sub = homology_range(&pc.sub, max_degree + 1)?;
    let h_total = homology_range(&pc.total, max_degree + 1)?;
    let h_quot = homology_range(&pc.quot_ref(), max_degree + 1)?;

    let mut include = Vec::new();
    let mut project = Vec::new();
    let mut connect = Vec::new();
    for p in 0..=max_degree {
        let inc = complex_map_matrix(&pc.sub, &pc.total, p)?;
        include.push(induced_on_homology(&inc, &h_sub[p], &h_total[p])?);
        let prj = complex_map_matrix(&pc.total, &pc.quotient, p)?;
        project.push(induced_on_homology(&prj, &h_total[p], &h_quot[p])?);
        connect.push(connecting_map(pc, p, &h_quot[p], if p == 0 { None } else { Some(&h_sub[p - 1]) })?);
    }

    // exactness at every node with both maps assembled
    let mut nodes = Vec::new();
    for p in 0..=max_degree {
        nodes.push((format!("H_{p}(X)"), check_exact(&include[p], &project[p])));
        nodes.push((format!("H_{p}(X,A)"), check_exact(&project[p], &connect[p])));
        if p + 1 <= max_degree {
            nodes.push((format!("H_{p}(A)"), check_exact(&connect[p + 1], &include[p])));
        }
    }
    Ok(PairLes {
        ring,
        max_degree,
        h_sub,
        h_total,
        h_quot,
        include,
        project,
        connect,
        nodes,
    })
}

impl PairComplexes {
    fn quot_ref(&self) -> &GradedComplex {
        &self.quotient
    }
}

/// The long exact sequence of a pair on the cochain side:
/// `… → H^{p−1}(A) → H^p(X,A) → H^p(X) → H^p(A) → …`.
///
/// In the returned structure `h_quot` holds the relative groups, `h_sub` the
/// groups of `A`; `include` is the map out of the relative complex,
/// `project` the restriction to `A`, and `connect` the coboundary
/// `H^p(A) → H^{p+1}(X,A)`.
pub fn les_of_pair_cochain(pc: &PairComplexes, max_degree: usize) -> Result<PairLes> {
    if !matches!(pc.total.kind, ComplexKind::Cochain) {
        return Err(CoarseError::Unsupported("cochain LES needs cochain complexes".into()));
    }
    let ring = pc.total.ring;
    let h_a = homology_range(&pc.sub, max_degree + 1)?;
    let h_x = homology_range(&pc.total, max_degree + 1)?;
    let h_rel = homology_range(&pc.quotient, max_degree + 1)?;

    let mut include = Vec::new();
    let mut project = Vec::new();
    let mut connect = Vec::new();
    for p in 0..=max_degree {
        // relative cochains extend by zero into the total complex
        let inc = complex_map_matrix(&pc.quotient, &pc.total, p)?;
        include.push(induced_on_homology(&inc, &h_rel[p], &h_x[p])?);
        // restriction to A is the transpose of the basis inclusion
        let restr = complex_map_matrix(&pc.sub, &pc.total, p)?.transpose();
        project.push(induced_on_homology(&restr, &h_x[p], &h_a[p])?);
        connect.push(cochain_connecting_map(
            pc,
            p,
            &h_a[p],
            if p + 1 <= max_degree { Some(&h_rel[p + 1]) } else { None },
        )?);
    }

    let mut nodes = Vec::new();
    for p in 0..=max_degree {
        nodes.push((format!("H^{p}(X)"), check_exact(&include[p], &project[p])));
        if p + 1 <= max_degree {
            nodes.push((format!("H^{p}(A)"), check_exact(&project[p], &connect[p])));
            nodes.push((format!("H^{}(X,A)", p + 1), check_exact(&connect[p], &include[p + 1])));
        }
    }
    Ok(PairLes {
        ring,
        max_degree,
        h_sub: h_a,
        h_total: h_x,
        h_quot: h_rel,
        include,
        project,
        connect,
        nodes,
    })
}

/// `δ: H^p(A) → H^{p+1}(X,A)`: extend a cocycle on `A` by zero, take the
/// total coboundary, and read it off in the relative complex. Works
/// generator by generator because only cocycles land there.
fn cochain_connecting_map(
    pc: &PairComplexes,
    p: usize,
    h_a_p: &GroupData,
    h_rel_next: Option<&GroupData>,
) -> Result<InducedMap> {
    let ring = pc.total.ring;
    let zero = zero_group(ring);
    let target = match h_rel_next {
        None => return Ok(zero_map(h_a_p, &zero)),
        Some(t) => t,
    };
    let extend = complex_map_matrix(&pc.sub, &pc.total, p)?;
    let delta = pc.total.boundary_out(p);
    let into_rel = complex_map_matrix(&pc.quotient, &pc.total, p + 1)?;
    let mut cols = Vec::with_capacity(h_a_p.num_gens());
    match (h_a_p, target) {
        (GroupData::Z(src), GroupData::Z(_)) => {
            let snf = smith(&into_rel, SnfWant::uv());
            for g in &src.gens {
                let w = delta.mul_vec(&extend.mul_vec(g));
                let x = solve(&snf, &w).ok_or(CoarseError::NoSolution)?;
                let c = target.coords_of_int(&x).ok_or(CoarseError::NoSolution)?;
                cols.push(c);
            }
        }
        (GroupData::Q(src), GroupData::Q(tq)) => {
            let sample = <BigRational as Zero>::zero();
            let ef = FMat::from_int(extend.rows, extend.cols, |i, j| extend.get(i, j).clone(), &sample);
            let df = FMat::from_int(delta.rows, delta.cols, |i, j| delta.get(i, j).clone(), &sample);
            let rf =
                FMat::from_int(into_rel.rows, into_rel.cols, |i, j| into_rel.get(i, j).clone(), &sample);
            for g in &src.gens {
                let w = df.mul_vec(&ef.mul_vec(g));
                let x = rf.solve(&w).ok_or(CoarseError::NoSolution)?;
                let c = tq.coords_of(&x).ok_or(CoarseError::NoSolution)?;
                cols.push(CoordVec::Q(c));
            }
        }
        (GroupData::Fp(src), GroupData::Fp(tq)) => {
            let sample = tq.sample();
            let ef = FMat::from_int(extend.rows, extend.cols, |i, j| extend.get(i, j).clone(), &sample);
            let df = FMat::from_int(delta.rows, delta.cols, |i, j| delta.get(i, j).clone(), &sample);
            let rf =
                FMat::from_int(into_rel.rows, into_rel.cols, |i, j| into_rel.get(i, j).clone(), &sample);
            for g in &src.gens {
                let w = df.mul_vec(&ef.mul_vec(g));
                let x = rf.solve(&w).ok_or(CoarseError::NoSolution)?;
                let c = tq.coords_of(&x).ok_or(CoarseError::NoSolution)?;
                cols.push(CoordVec::Fp(c));
            }
        }
        _ => return Err(CoarseError::Unsupported("ring mismatch".into())),
    }
    Ok(InducedMap::from_columns(h_a_p, target, cols))
}

/// Matrix of the canonical map between two assembled complexes in degree `p`,
/// through embeddings when either side is abstract.
pub fn complex_map_matrix(from: &GradedComplex, to: &GradedComplex, p: usize) -> Result<IMat> {
    match (&from.embeddings[p], &to.embeddings[p]) {
        (None, None) => tuple_inclusion_matrix(from, to, p),
        (Some(ef), Some(et)) => {
            // through the plain tuple modules: solve et·X = incl·ef
            let ft = from.tuple_list(p).ok_or_else(|| {
                CoarseError::Unsupported("abstract basis without ambient tuples".into())
            })?;
            let tt = to.tuple_list(p).ok_or_else(|| {
                CoarseError::Unsupported("abstract basis without ambient tuples".into())
            })?;
            let incl = tuple_list_inclusion(ft, tt, from.coeff_rank);
            express_columns(et, &incl.mul(ef), to.ring)
        }
        (Some(ef), None) => {
            let ft = from.tuple_list(p).ok_or_else(|| {
                CoarseError::Unsupported("abstract basis without ambient tuples".into())
            })?;
            let tt = to.tuple_list(p).ok_or_else(|| {
                CoarseError::Unsupported("abstract basis without ambient tuples".into())
            })?;
            let incl = tuple_list_inclusion(ft, tt, from.coeff_rank);
            Ok(incl.mul(ef))
        }
        (None, Some(et)) => {
            let ft = from.tuple_list(p).ok_or_else(|| {
                CoarseError::Unsupported("abstract basis without ambient tuples".into())
            })?;
            let tt = to.tuple_list(p).ok_or_else(|| {
                CoarseError::Unsupported("abstract basis without ambient tuples".into())
            })?;
            let incl = tuple_list_inclusion(ft, tt, from.coeff_rank);
            express_columns(et, &incl, to.ring)
        }
    }
}

fn express_columns(basis: &IMat, m: &IMat, ring: Ring) -> Result<IMat> {
    match ring {
        Ring::Z | Ring::Q => {
            let snf = smith(basis, SnfWant::uv());
            let mut out = IMat::zeros(basis.cols, m.cols);
            for j in 0..m.cols {
                let x = solve(&snf, &m.column(j)).ok_or(CoarseError::NoSolution)?;
                for i in 0..basis.cols {
                    out.set(i, j, x[i].clone());
                }
            }
            Ok(out)
        }
        Ring::Fp(p) => {
            let sample = Fp::new(0, p);
            let bf = FMat::from_int(basis.rows, basis.cols, |i, j| basis.get(i, j).clone(), &sample);
            let mut out = IMat::zeros(basis.cols, m.cols);
            for j in 0..m.cols {
                let col: Vec<Fp> = (0..m.rows).map(|i| Fp::from_big(m.get(i, j), p)).collect();
                let x = bf.solve(&col).ok_or(CoarseError::NoSolution)?;
                for i in 0..basis.cols {
                    out.set(i, j, BigInt::from(x[i].v));
                }
            }
            Ok(out)
        }
    }
}

/// The connecting homomorphism `∂: H_p(X,A) → H_{p−1}(A)`: lift each
/// generating relative cycle along the basis inclusion, take the boundary in
/// the total complex, and read it off in the sub complex. Only cycles land in
/// the sub complex, so this works generator by generator.
fn connecting_map(
    pc: &PairComplexes,
    p: usize,
    h_quot_p: &GroupData,
    h_sub_prev: Option<&GroupData>,
) -> Result<InducedMap> {
    let ring = pc.total.ring;
    let zero = zero_group(ring);
    let target = match h_sub_prev {
        None => {
            return Ok(zero_map(h_quot_p, &zero));
        }
        Some(t) => t,
    };
    let lift = complex_map_matrix(&pc.quotient, &pc.total, p)?;
    let boundary = pc.total.boundary_out(p);
    let into_sub = complex_map_matrix(&pc.sub, &pc.total, p - 1)?;
    let mut cols = Vec::with_capacity(h_quot_p.num_gens());
    match (h_quot_p, target) {
        (GroupData::Z(src), GroupData::Z(_)) => {
            let snf = smith(&into_sub, SnfWant::uv());
            for g in &src.gens {
                let w = boundary.mul_vec(&lift.mul_vec(g));
                let x = solve(&snf, &w).ok_or(CoarseError::NoSolution)?;
                let c = target.coords_of_int(&x).ok_or(CoarseError::NoSolution)?;
                cols.push(c);
            }
        }
        (GroupData::Q(src), GroupData::Q(tq)) => {
            let sample = <BigRational as Zero>::zero();
            let liftf = FMat::from_int(lift.rows, lift.cols, |i, j| lift.get(i, j).clone(), &sample);
            let bf =
                FMat::from_int(boundary.rows, boundary.cols, |i, j| boundary.get(i, j).clone(), &sample);
            let intof =
                FMat::from_int(into_sub.rows, into_sub.cols, |i, j| into_sub.get(i, j).clone(), &sample);
            for g in &src.gens {
                let w = bf.mul_vec(&liftf.mul_vec(g));
                let x = intof.solve(&w).ok_or(CoarseError::NoSolution)?;
                let c = tq.coords_of(&x).ok_or(CoarseError::NoSolution)?;
                cols.push(CoordVec::Q(c));
            }
        }
        (GroupData::Fp(src), GroupData::Fp(tq)) => {
            let sample = tq.sample();
            let liftf = FMat::from_int(lift.rows, lift.cols, |i, j| lift.get(i, j).clone(), &sample);
            let bf =
                FMat::from_int(boundary.rows, boundary.cols, |i, j| boundary.get(i, j).clone(), &sample);
            let intof =
                FMat::from_int(into_sub.rows, into_sub.cols, |i, j| into_sub.get(i, j).clone(), &sample);
            for g in &src.gens {
                let w = bf.mul_vec(&liftf.mul_vec(g));
                let x = intof.solve(&w).ok_or(CoarseError::NoSolution)?;
                let c = tq.coords_of(&x).ok_or(CoarseError::NoSolution)?;
                cols.push(CoordVec::Fp(c));
            }
        }
        _ => return Err(CoarseError::Unsupported("ring mismatch".into())),
    }
    Ok(InducedMap::from_columns(h_quot_p, target, cols))
}

// ---------------------------------------------------------------------------
// Mayer–Vietoris

pub struct MvReport {
    pub ring: Ring,
    pub max_degree: usize,
    pub h_cap: Vec<GroupData>,
    pub h_a: Vec<GroupData>,
    pub h_b: Vec<GroupData>,
    pub h_x: Vec<GroupData>,
    /// `(i_*, j_*)`, stacked.
    pub diag: Vec<InducedMap>,
    /// `k_* − l_*`.
    pub diff: Vec<InducedMap>,
    /// `∂^MV` built from the connecting map of `(B, A∩B)`, the inverse of the
    /// excision isomorphism, and the map induced by `X → (X, A)`.
    pub connecting: Vec<InducedMap>,
    pub nodes: Vec<(String, ExactnessReport)>,
}

impl MvReport {
    pub fn all_exact(&self) -> bool {
        self.nodes.iter().all(|(_, r)| r.exact)
    }
}

/// Assemble the Mayer–Vietoris sequence of an excisive cover `X = A ∪ B` on
/// chain complexes rel an optional collar.
#[allow(clippy::too_many_arguments)]
pub fn mayer_vietoris(
    space: &CoarseSpace,
    a: &SubsetRef,
    b: &SubsetRef,
    level: usize,
    max_degree: usize,
    coeffs: &CoefficientModule,
    collar: Option<&SubsetRef>,
    cap: usize,
) -> Result<MvReport> {
    let excisive = crate::space::check_excisive(space, a, b);
    if let crate::space::Excisiveness::FailsAt(n) = excisive {
        return Err(CoarseError::NotExcisive(n));
    }
    let ring = coeffs.ring;
    let cap_set = a.intersect(b);
    let empty = SubsetRef::empty();
    let collar_ref = collar.unwrap_or(&empty);
    let with_collar = |s: &SubsetRef| s.union(collar_ref);
    let mk = |restrict: &SubsetRef, kill: Option<&SubsetRef>| -> Result<GradedComplex> {
        assemble(&AssembleSpec {
            space,
            level,
            p_max: max_degree + 1,
            coeffs,
            restrict_to: Some(restrict),
            relative: kill,
            collar: if collar_ref.is_empty() { None } else { Some(collar_ref) },
            variant: Variant::Plain,
            kind: ComplexKind::Chain,
            cap,
        })
    };
    let all = SubsetRef { members: space.all_points() };
    let cx_cap = mk(&with_collar(&cap_set), None)?;
    let cx_a = mk(&with_collar(a), None)?;
    let cx_b = mk(&with_collar(b), None)?;
    let cx_x = mk(&all, None)?;
    let h_cap = homology_range(&cx_cap, max_degree + 1)?;
    let h_a = homology_range(&cx_a, max_degree + 1)?;
    let h_b = homology_range(&cx_b, max_degree + 1)?;
    let h_x = homology_range(&cx_x, max_degree + 1)?;

    // pairs for the connecting composite
    let pc_xa = pair_complexes(
        space,
        a,
        level,
        max_degree + 1,
        coeffs,
        collar,
        &Variant::Plain,
        ComplexKind::Chain,
        cap,
    )?;
    // (B, A∩B): sub complex on A∩B, total on B, quotient B rel A∩B
    let b_support = with_collar(b);
    let quotient_b = assemble(&AssembleSpec {
        space,
        level,
        p_max: max_degree + 1,
        coeffs,
        restrict_to: Some(&b_support),
        relative: Some(&cap_set),
        collar: if collar_ref.is_empty() { None } else { Some(collar_ref) },
        variant: Variant::Plain,
        kind: ComplexKind::Chain,
        cap,
    })?;
    let pc_b = PairComplexes { sub: cx_cap, total: cx_b, quotient: quotient_b };
    let h_quot_xa = homology_range(&pc_xa.quotient, max_degree + 1)?;
    let h_quot_b = homology_range(&pc_b.quotient, max_degree + 1)?;

    let mut diag = Vec::new();
    let mut diff = Vec::new();
    let mut connecting = Vec::new();
    for p in 0..=max_degree {
        // stacked (i_*, j_*): H(A∩B) -> H(A) ⊕ H(B); build via direct sum group
        let i_m = complex_map_matrix(&pc_b.sub, &cx_a, p)?;
        let j_m = complex_map_matrix(&pc_b.sub, &pc_b.total, p)?;
        let i_star = induced_on_homology(&i_m, &h_cap[p], &h_a[p])?;
        let j_star = induced_on_homology(&j_m, &h_cap[p], &h_b[p])?;
        diag.push(stack_maps(&h_cap[p], &h_a[p], &h_b[p], &i_star, &j_star));
        let k_m = complex_map_matrix(&cx_a, &cx_x, p)?;
        let l_m = complex_map_matrix(&pc_b.total, &cx_x, p)?;
        let k_star = induced_on_homology(&k_m, &h_a[p], &h_x[p])?;
        let l_star = induced_on_homology(&l_m, &h_b[p], &h_x[p])?;
        diff.push(difference_map(&h_a[p], &h_b[p], &h_x[p], &k_star, &l_star));

        // ∂^MV = ∂_{(B,A∩B)} ∘ exc⁻¹ ∘ (X → (X,A))
        let x_to_rel = complex_map_matrix(&cx_x, &pc_xa.quotient, p)?;
        let x_rel = induced_on_homology(&x_to_rel, &h_x[p], &h_quot_xa[p])?;
        let exc_m = complex_map_matrix(&pc_b.quotient, &pc_xa.quotient, p)?;
        let exc = induced_on_homology(&exc_m, &h_quot_b[p], &h_quot_xa[p])?;
        let exc_inv = exc
            .inverse()
            .ok_or(CoarseError::ExcisionNotInvertible(p))?;
        let conn = connecting_map(
            &pc_b,
            p,
            &h_quot_b[p],
            if p == 0 { None } else { Some(&h_cap[p - 1]) },
        )?;
        connecting.push(conn.compose(&exc_inv).compose(&x_rel));
    }

    let mut nodes = Vec::new();
    for p in 0..=max_degree {
        nodes.push((format!("H_{p}(A)+H_{p}(B)"), check_exact(&diag[p], &diff[p])));
        nodes.push((format!("H_{p}(X)"), check_exact(&diff[p], &connecting[p])));
        if p + 1 <= max_degree {
            nodes.push((
                format!("H_{p}(A∩B)"),
                check_exact(&connecting[p + 1], &diag[p]),
            ));
        }
    }
    Ok(MvReport {
        ring,
        max_degree,
        h_cap,
        h_a,
        h_b,
        h_x,
        diag,
        diff,
        connecting,
        nodes,
    })
}

/// Direct-sum target map `(f, g): S → A ⊕ B` in stacked coordinates.
fn stack_maps(
    src: &GroupData,
    _a: &GroupData,
    _b: &GroupData,
    f: &InducedMap,
    g: &InducedMap,
) -> InducedMap {
    let src_orders = src.gen_orders();
    let tgt_orders: Vec<BigInt> = f
        .tgt_orders
        .iter()
        .chain(g.tgt_orders.iter())
        .cloned()
        .collect();
    let inner = match (&f.inner, &g.inner) {
        (crate::linalg::group::InducedInner::Z(mf), crate::linalg::group::InducedInner::Z(mg)) => {
            let mut m = IMat::zeros(mf.rows + mg.rows, mf.cols);
            for j in 0..mf.cols {
                for i in 0..mf.rows {
                    m.set(i, j, mf.get(i, j).clone());
                }
                for i in 0..mg.rows {
                    m.set(mf.rows + i, j, mg.get(i, j).clone());
                }
            }
            crate::linalg::group::InducedInner::Z(m)
        }
        (crate::linalg::group::InducedInner::Q(mf), crate::linalg::group::InducedInner::Q(mg)) => {
            let sample = <BigRational as Zero>::zero();
            let mut m = FMat::zeros(mf.rows + mg.rows, mf.cols, &sample);
            for j in 0..mf.cols {
                for i in 0..mf.rows {
                    m.set(i, j, mf.get(i, j).clone());
                }
                for i in 0..mg.rows {
                    m.set(mf.rows + i, j, mg.get(i, j).clone());
                }
            }
            crate::linalg::group::InducedInner::Q(m)
        }
        (crate::linalg::group::InducedInner::Fp(mf), crate::linalg::group::InducedInner::Fp(mg)) => {
            let sample = mf.data.first().copied().unwrap_or_else(|| {
                mg.data.first().copied().unwrap_or(Fp { v: 0, p: 2 })
            });
            let mut m = FMat::zeros(mf.rows + mg.rows, mf.cols, &sample);
            for j in 0..mf.cols {
                for i in 0..mf.rows {
                    m.set(i, j, *mf.get(i, j));
                }
                for i in 0..mg.rows {
                    m.set(mf.rows + i, j, *mg.get(i, j));
                }
            }
            crate::linalg::group::InducedInner::Fp(m)
        }
        _ => panic!("ring mismatch"),
    };
    InducedMap { ring: f.ring, src_orders, tgt_orders, inner }
}

/// Difference map `k_* − l_* : A ⊕ B → X` in stacked coordinates.
fn difference_map(
    a: &GroupData,
    b: &GroupData,
    _x: &GroupData,
    k: &InducedMap,
    l: &InducedMap,
) -> InducedMap {
    let src_orders: Vec<BigInt> =
        a.gen_orders().into_iter().chain(b.gen_orders()).collect();
    let tgt_orders = k.tgt_orders.clone();
    let inner = match (&k.inner, &l.inner) {
        (crate::linalg::group::InducedInner::Z(mk), crate::linalg::group::InducedInner::Z(ml)) => {
            let mut m = IMat::zeros(mk.rows, mk.cols + ml.cols);
            for i in 0..mk.rows {
                for j in 0..mk.cols {
                    m.set(i, j, mk.get(i, j).clone());
                }
                for j in 0..ml.cols {
                    m.set(i, mk.cols + j, -ml.get(i, j).clone());
                }
            }
            crate::linalg::group::InducedInner::Z(m)
        }
        (crate::linalg::group::InducedInner::Q(mk), crate::linalg::group::InducedInner::Q(ml)) => {
            let sample = <BigRational as Zero>::zero();
            let mut m = FMat::zeros(mk.rows, mk.cols + ml.cols, &sample);
            for i in 0..mk.rows {
                for j in 0..mk.cols {
                    m.set(i, j, mk.get(i, j).clone());
                }
                for j in 0..ml.cols {
                    m.set(i, mk.cols + j, Field::neg(ml.get(i, j)));
                }
            }
            crate::linalg::group::InducedInner::Q(m)
        }
        (crate::linalg::group::InducedInner::Fp(mk), crate::linalg::group::InducedInner::Fp(ml)) => {
            let sample = mk.data.first().copied().unwrap_or_else(|| {
                ml.data.first().copied().unwrap_or(Fp { v: 0, p: 2 })
            });
            let mut m = FMat::zeros(mk.rows, mk.cols + ml.cols, &sample);
            for i in 0..mk.rows {
                for j in 0..mk.cols {
                    m.set(i, j, *mk.get(i, j));
                }
                for j in 0..ml.cols {
                    m.set(i, mk.cols + j, Field::neg(ml.get(i, j)));
                }
            }
            crate::linalg::group::InducedInner::Fp(m)
        }
        _ => panic!("ring mismatch"),
    };
    InducedMap { ring: k.ring, src_orders, tgt_orders, inner }
}

// ---------------------------------------------------------------------------
// towers

/// One homology degree along a tower, with the maps between steps.
pub struct DegreeTower {
    pub groups: Vec<GroupData>,
    pub maps: Vec<InducedMap>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Stabilization {
    /// Least index from which `k` consecutive steps are isomorphisms.
    StabilizedAt(usize),
    NonStabilized,
}

impl Stabilization {
    pub fn index(&self) -> Option<usize> {
        match self {
            Stabilization::StabilizedAt(i) => Some(*i),
            Stabilization::NonStabilized => None,
        }
    }
}

/// Detect the least index after which all further maps are isomorphisms, for
/// at least `k` consecutive steps. A stabilization heuristic, not a limit.
pub fn tower_limit(maps: &[InducedMap], k: usize) -> Stabilization {
    let n = maps.len();
    if n < k {
        return Stabilization::NonStabilized;
    }
    let iso: Vec<bool> = maps.iter().map(InducedMap::is_isomorphism).collect();
    for start in 0..=n.saturating_sub(k) {
        if iso[start..].iter().all(|&b| b) {
            return Stabilization::StabilizedAt(start);
        }
    }
    Stabilization::NonStabilized
}
