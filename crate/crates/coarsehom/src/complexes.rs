//! The ordinary coarse (co)chain complexes on a window.
//!
//! Chains in degree `p` are finitely supported sums over ordered
//! `(p+1)`-tuples whose entries are pairwise related at a fixed chain level;
//! tuples with repeated entries are basis elements in their own right.
//! Assembly produces explicit integer matrices, optionally relative to a
//! subset, rel a window collar, restricted to Γ-invariants, or divided by
//! coinvariance relations. The prism operators, the flasque contraction and
//! the excision retraction act at chain level.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{CoarseError, Result};
use crate::homotopy::{merge_tuple, Cylinder, SubdivisionSchedule};
use crate::linalg::{is_prime, IMat, Ring};
use crate::maps::{check_action, GroupAction, SignedPerm, DEFAULT_WORD_CAP};
use crate::space::{CoarseSpace, PointId, SubsetRef};

pub type Tuple = Vec<PointId>;

/// Coefficients: a ring together with a free module of finite rank carrying a
/// signed-permutation action keyed by generator name.
#[derive(Clone, Debug)]
pub struct CoefficientModule {
    pub ring: Ring,
    pub rank: usize,
    pub action: BTreeMap<String, SignedPerm>,
}

impl CoefficientModule {
    pub fn trivial(ring: Ring) -> Result<Self> {
        if let Ring::Fp(p) = ring {
            if !is_prime(p) {
                return Err(CoarseError::NotPrime(p));
            }
        }
        Ok(CoefficientModule { ring, rank: 1, action: BTreeMap::new() })
    }

    pub fn with_action(ring: Ring, rank: usize, action: BTreeMap<String, SignedPerm>) -> Result<Self> {
        if let Ring::Fp(p) = ring {
            if !is_prime(p) {
                return Err(CoarseError::NotPrime(p));
            }
        }
        for sp in action.values() {
            if sp.images.len() != rank || !sp.is_valid() {
                return Err(CoarseError::BadCoefficientAction("rank mismatch".into()));
            }
        }
        Ok(CoefficientModule { ring, rank, action })
    }

    /// Signed permutation of one generator letter, inverted on demand.
    fn letter_perm(&self, name: &str, inverted: bool) -> SignedPerm {
        let sp = self
            .action
            .get(name)
            .cloned()
            .unwrap_or_else(|| SignedPerm::identity(self.rank));
        if !inverted {
            return sp;
        }
        let mut inv = vec![(0usize, 1i8); self.rank];
        for (k, &(img, sign)) in sp.images.iter().enumerate() {
            inv[img] = (k, sign);
        }
        SignedPerm { images: inv }
    }
}

/// A finitely supported coefficient assignment on `(p+1)`-tuples.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CoarseChain {
    pub degree: usize,
    pub level: usize,
    pub coeffs: BTreeMap<Tuple, BigInt>,
}

impl CoarseChain {
    pub fn zero(degree: usize, level: usize) -> Self {
        CoarseChain { degree, level, coeffs: BTreeMap::new() }
    }

    pub fn generator(tuple: Tuple, level: usize) -> Self {
        let degree = tuple.len() - 1;
        let mut coeffs = BTreeMap::new();
        coeffs.insert(tuple, BigInt::one());
        CoarseChain { degree, level, coeffs }
    }

    pub fn add_term(&mut self, tuple: Tuple, coeff: BigInt) {
        debug_assert_eq!(tuple.len(), self.degree + 1);
        let e = self.coeffs.entry(tuple).or_insert_with(BigInt::zero);
        *e += coeff;
    }

    pub fn normalized(mut self) -> Self {
        self.coeffs.retain(|_, v| !Zero::is_zero(v));
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(Zero::is_zero)
    }

    pub fn add(&self, other: &CoarseChain) -> CoarseChain {
        // zero chains carry no degree information worth defending
        if other.coeffs.is_empty() {
            return self.clone().normalized();
        }
        if self.coeffs.is_empty() {
            return other.clone().normalized();
        }
        debug_assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        out.level = self.level.max(other.level);
        for (t, v) in &other.coeffs {
            out.add_term(t.clone(), v.clone());
        }
        out.normalized()
    }

    pub fn sub(&self, other: &CoarseChain) -> CoarseChain {
        if other.coeffs.is_empty() {
            return self.clone().normalized();
        }
        let mut out = self.clone();
        out.level = self.level.max(other.level);
        for (t, v) in &other.coeffs {
            out.add_term(t.clone(), -v.clone());
        }
        out.normalized()
    }

    /// Entrywise image under a point map; repeated entries are kept.
    pub fn mapped(&self, f: impl Fn(PointId) -> PointId) -> CoarseChain {
        let mut out = CoarseChain::zero(self.degree, self.level);
        for (t, v) in &self.coeffs {
            let img: Tuple = t.iter().map(|&p| f(p)).collect();
            out.add_term(img, v.clone());
        }
        out.normalized()
    }
}

/// Alternating sum of face deletions; degree 0 goes to the zero chain.
pub fn apply_boundary(c: &CoarseChain) -> CoarseChain {
    if c.degree == 0 {
        return CoarseChain::zero(0, c.level);
    }
    let mut out = CoarseChain::zero(c.degree - 1, c.level);
    for (t, v) in &c.coeffs {
        for i in 0..t.len() {
            let mut face = t.clone();
            face.remove(i);
            let sign = if i % 2 == 0 { v.clone() } else { -v.clone() };
            out.add_term(face, sign);
        }
    }
    out.normalized()
}

/// A function on `(p+1)`-tuples, stored on its finite support.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CoarseCochain {
    pub degree: usize,
    pub level: usize,
    pub values: BTreeMap<Tuple, BigInt>,
}

impl CoarseCochain {
    pub fn zero(degree: usize, level: usize) -> Self {
        CoarseCochain { degree, level, values: BTreeMap::new() }
    }

    pub fn indicator(tuple: Tuple, level: usize) -> Self {
        let degree = tuple.len() - 1;
        let mut values = BTreeMap::new();
        values.insert(tuple, BigInt::one());
        CoarseCochain { degree, level, values }
    }

    pub fn eval(&self, tuple: &Tuple) -> BigInt {
        self.values.get(tuple).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn normalized(mut self) -> Self {
        self.values.retain(|_, v| !Zero::is_zero(v));
        self
    }

    pub fn is_zero(&self) -> bool {
        self.values.values().all(Zero::is_zero)
    }

    pub fn sub(&self, other: &CoarseCochain) -> CoarseCochain {
        debug_assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        out.level = self.level.max(other.level);
        for (t, v) in &other.values {
            let e = out.values.entry(t.clone()).or_insert_with(BigInt::zero);
            *e -= v;
        }
        out.normalized()
    }
}

/// A cochain or the coboundary of one, evaluated symbolically so that values
/// off any materialized support stay exact.
#[derive(Clone, Copy)]
pub enum CochainExpr<'a> {
    Plain(&'a CoarseCochain),
    Coboundary(&'a CoarseCochain),
}

impl CochainExpr<'_> {
    pub fn degree(&self) -> usize {
        match self {
            CochainExpr::Plain(phi) => phi.degree,
            CochainExpr::Coboundary(phi) => phi.degree + 1,
        }
    }

    pub fn eval(&self, tuple: &Tuple) -> BigInt {
        match self {
            CochainExpr::Plain(phi) => phi.eval(tuple),
            CochainExpr::Coboundary(phi) => {
                let mut acc = BigInt::zero();
                for i in 0..tuple.len() {
                    let mut face = tuple.clone();
                    face.remove(i);
                    let v = phi.eval(&face);
                    if i % 2 == 0 {
                        acc += v;
                    } else {
                        acc -= v;
                    }
                }
                acc
            }
        }
    }
}

/// All `(p+1)`-tuples from `allowed` with pairwise level-related entries.
pub fn enumerate_tuples(
    space: &CoarseSpace,
    allowed: Option<&BTreeSet<PointId>>,
    level: usize,
    degree: usize,
    cap: usize,
) -> Result<Vec<Tuple>> {
    let e = space.chain().level(level);
    let pool: Vec<PointId> = match allowed {
        Some(set) => set.iter().copied().collect(),
        None => space.points().collect(),
    };
    let mut out: Vec<Tuple> = Vec::new();
    let mut stack: Vec<Tuple> = pool.iter().rev().map(|&p| vec![p]).collect();
    // depth-first in lexicographic order
    while let Some(t) = stack.pop() {
        if t.len() == degree + 1 {
            out.push(t);
            if out.len() > cap {
                return Err(CoarseError::CapExceeded(format!(
                    "tuple basis exceeds cap {cap} at degree {degree}"
                )));
            }
            continue;
        }
        for &q in pool.iter().rev() {
            if t.iter().all(|&x| e.contains(x, q) && e.contains(q, x)) {
                let mut longer = t.clone();
                longer.push(q);
                stack.push(longer);
            }
        }
    }
    Ok(out)
}

/// Alexander–Spanier coboundary, evaluated over the level tuples of a space.
pub fn apply_coboundary(
    space: &CoarseSpace,
    allowed: Option<&BTreeSet<PointId>>,
    phi: &CoarseCochain,
    cap: usize,
) -> Result<CoarseCochain> {
    let tuples = enumerate_tuples(space, allowed, phi.level, phi.degree + 1, cap)?;
    let mut out = CoarseCochain::zero(phi.degree + 1, phi.level);
    for y in tuples {
        let mut acc = BigInt::zero();
        for i in 0..y.len() {
            let mut face = y.clone();
            face.remove(i);
            let v = phi.eval(&face);
            if i % 2 == 0 {
                acc += v;
            } else {
                acc -= v;
            }
        }
        if !Zero::is_zero(&acc) {
            out.values.insert(y, acc);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// assembled complexes

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ComplexKind {
    Chain,
    Cochain,
}

#[derive(Clone, Debug)]
pub enum Variant<'a> {
    Plain,
    /// Γ-invariant subcomplex.
    Invariant(&'a GroupAction),
    /// Quotient by the relations `γφ − φ`.
    Coinvariant(&'a GroupAction),
}

#[derive(Clone, Debug)]
pub struct DegreeData {
    /// Free rank of the presented module in this degree.
    pub dim: usize,
    /// Basis tuples when the degree is a plain tuple module
    /// (dimension = tuples × coefficient rank); absent for invariants.
    pub tuples: Option<Vec<Tuple>>,
    /// For abstract bases: the plain tuple basis the embedding lands in.
    pub ambient_tuples: Option<Vec<Tuple>>,
}

/// A complex of free modules with optional relation lattices, ready for the
/// homology engine. `diffs[p]` leaves degree `p` in the complex direction.
pub struct GradedComplex {
    pub ring: Ring,
    pub kind: ComplexKind,
    pub coeff_rank: usize,
    pub level: usize,
    pub p_max: usize,
    pub degrees: Vec<DegreeData>,
    pub diffs: Vec<IMat>,
    pub relations: Vec<Option<IMat>>,
    /// For invariant complexes: columns embed the abstract basis into the
    /// plain tuple module of the same degree.
    pub embeddings: Vec<Option<IMat>>,
    /// Set on coinvariant quotients whose group order is not invertible in
    /// the ring; the literal quotient can then carry extra torsion.
    pub coinvariant_warning: bool,
}

impl GradedComplex {
    pub fn dim(&self, p: usize) -> usize {
        self.degrees[p].dim
    }

    /// Differential leaving degree `p`.
    pub fn boundary_out(&self, p: usize) -> &IMat {
        &self.diffs[p]
    }

    /// Differential entering degree `p`, if assembled.
    pub fn boundary_in(&self, p: usize) -> Option<&IMat> {
        match self.kind {
            ComplexKind::Chain => self.diffs.get(p + 1),
            ComplexKind::Cochain => {
                if p == 0 {
                    None
                } else {
                    self.diffs.get(p - 1)
                }
            }
        }
    }

    /// The tuple list underlying degree `p`, abstract bases included.
    pub fn tuple_list(&self, p: usize) -> Option<&Vec<Tuple>> {
        self.degrees[p].tuples.as_ref().or(self.degrees[p].ambient_tuples.as_ref())
    }

    /// Index of a `(tuple, coefficient)` basis vector in degree `p`.
    pub fn basis_index(&self, p: usize, tuple: &Tuple, coeff: usize) -> Option<usize> {
        let tuples = self.degrees[p].tuples.as_ref()?;
        let at = tuples.binary_search(tuple).ok()?;
        Some(at * self.coeff_rank + coeff)
    }

    /// Project a chain onto the kept basis: killed tuples drop (quotient map).
    pub fn project_chain(&self, p: usize, c: &CoarseChain) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); self.dim(p)];
        for (t, coeff) in &c.coeffs {
            if let Some(i) = self.basis_index(p, t, 0) {
                v[i] += coeff;
            }
        }
        v
    }
}

pub const DEFAULT_TUPLE_CAP: usize = 200_000;

pub struct AssembleSpec<'a> {
    pub space: &'a CoarseSpace,
    pub level: usize,
    pub p_max: usize,
    pub coeffs: &'a CoefficientModule,
    /// Basis support; defaults to the whole space.
    pub restrict_to: Option<&'a SubsetRef>,
    /// Tuples inside this set are killed (relative complex).
    pub relative: Option<&'a SubsetRef>,
    /// Tuples inside the collar are killed as well (window approximation).
    pub collar: Option<&'a SubsetRef>,
    pub variant: Variant<'a>,
    pub kind: ComplexKind,
    pub cap: usize,
}

impl<'a> AssembleSpec<'a> {
    pub fn plain(
        space: &'a CoarseSpace,
        level: usize,
        p_max: usize,
        coeffs: &'a CoefficientModule,
        kind: ComplexKind,
    ) -> Self {
        AssembleSpec {
            space,
            level,
            p_max,
            coeffs,
            restrict_to: None,
            relative: None,
            collar: None,
            variant: Variant::Plain,
            kind,
            cap: DEFAULT_TUPLE_CAP,
        }
    }
}

/// Assemble the coarse (co)chain complex described by `spec`.
///
/// The basis in degree `p` is all `(p+1)`-tuples with pairwise level-related
/// entries from the support, minus those killed by the relative subset or the
/// collar, tensored with the coefficient module. `∂∘∂ = 0` is verified.
pub fn assemble(spec: &AssembleSpec) -> Result<GradedComplex> {
    let rank = spec.coeffs.rank;
    let kill: BTreeSet<PointId> = spec
        .relative
        .map(|s| s.members.clone())
        .unwrap_or_default()
        .union(&spec.collar.map(|s| s.members.clone()).unwrap_or_default())
        .copied()
        .collect();
    let allowed: Option<BTreeSet<PointId>> = spec.restrict_to.map(|s| s.members.clone());

    // gate the equivariant variants
    let action: Option<&GroupAction> = match &spec.variant {
        Variant::Plain => None,
        Variant::Invariant(a) | Variant::Coinvariant(a) => {
            let report = check_action(a, spec.space, DEFAULT_WORD_CAP)?;
            if !report.passes_equivariant_gate() {
                return Err(match report.isocoarse {
                    crate::maps::Isocoarseness::FailsAt { level, .. } => {
                        CoarseError::NotIsocoarse(level)
                    }
                    _ if !report.proper.holds() => CoarseError::NotProper,
                    _ => CoarseError::NotIsocoarse(spec.level),
                });
            }
            if matches!(spec.kind, ComplexKind::Cochain)
                && matches!(spec.variant, Variant::Invariant(_))
            {
                return Err(CoarseError::Unsupported(
                    "invariant variant is a chain-side construction".into(),
                ));
            }
            if matches!(spec.kind, ComplexKind::Chain)
                && matches!(spec.variant, Variant::Coinvariant(_))
            {
                return Err(CoarseError::Unsupported(
                    "coinvariant variant is a cochain-side construction".into(),
                ));
            }
            Some(a)
        }
    };
    if let Some(a) = action {
        // kill sets and the support must be invariant
        let (elements, _) = a.enumerate_elements(DEFAULT_WORD_CAP);
        let inv = |set: &BTreeSet<PointId>| {
            set.iter().all(|&p| {
                elements
                    .iter()
                    .all(|el| el.apply(p).map_or(true, |q| set.contains(&q)))
            })
        };
        if !inv(&kill) {
            return Err(CoarseError::Unsupported("kill set not action invariant".into()));
        }
        if let Some(s) = &allowed {
            if !inv(s) {
                return Err(CoarseError::Unsupported("support not action invariant".into()));
            }
        }
    }

    // kept tuple bases per degree
    let mut kept: Vec<Vec<Tuple>> = Vec::with_capacity(spec.p_max + 1);
    for p in 0..=spec.p_max {
        let all = enumerate_tuples(spec.space, allowed.as_ref(), spec.level, p, spec.cap)?;
        let keep: Vec<Tuple> = all
            .into_iter()
            .filter(|t| !t.iter().all(|x| kill.contains(x)))
            .collect();
        kept.push(keep);
    }
    let index: Vec<BTreeMap<&Tuple, usize>> = kept
        .iter()
        .map(|ts| ts.iter().enumerate().map(|(i, t)| (t, i)).collect())
        .collect();

    // plain boundary matrices with the coefficient block structure
    let mut boundaries: Vec<IMat> = Vec::with_capacity(spec.p_max + 1);
    boundaries.push(IMat::zeros(0, kept[0].len() * rank));
    for p in 1..=spec.p_max {
        let rows = kept[p - 1].len() * rank;
        let mut m = IMat::zeros(rows, kept[p].len() * rank);
        for (j, t) in kept[p].iter().enumerate() {
            for i in 0..t.len() {
                let mut face = t.clone();
                face.remove(i);
                if let Some(&fi) = index[p - 1].get(&face) {
                    let sign = if i % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                    for k in 0..rank {
                        let cur = m.get(fi * rank + k, j * rank + k) + &sign;
                        m.set(fi * rank + k, j * rank + k, cur);
                    }
                }
            }
        }
        boundaries.push(m);
    }
    verify_square_zero(&boundaries)?;

    // generator matrices of the action on each kept basis
    let action_mats: Vec<Vec<IMat>> = match action {
        None => Vec::new(),
        Some(a) => {
            let mut per_degree = Vec::with_capacity(spec.p_max + 1);
            for p in 0..=spec.p_max {
                let mut mats = Vec::new();
                for g in &a.generators {
                    let perm = spec.coeffs.letter_perm(&g.name, false);
                    let dim = kept[p].len() * rank;
                    let mut m = IMat::zeros(dim, dim);
                    for (j, t) in kept[p].iter().enumerate() {
                        // γ e_{t,k} = sign_k · e_{tγ⁻¹, perm(k)}
                        let img: Option<Tuple> =
                            t.iter().map(|&x| g.backward[x.idx()]).collect();
                        let Some(img) = img else {
                            return Err(CoarseError::Unsupported(
                                "action leaves the window on a basis tuple".into(),
                            ));
                        };
                        let Some(&ti) = index[p].get(&img) else {
                            return Err(CoarseError::Unsupported(
                                "action image tuple missing from the basis".into(),
                            ));
                        };
                        for k in 0..rank {
                            let (k2, sign) = perm.images[k];
                            m.set(ti * rank + k2, j * rank + k, BigInt::from(sign as i64));
                        }
                    }
                    mats.push(m);
                }
                per_degree.push(mats);
            }
            per_degree
        }
    };

    let degrees_plain: Vec<DegreeData> = kept
        .iter()
        .map(|ts| DegreeData { dim: ts.len() * rank, tuples: Some(ts.clone()), ambient_tuples: None })
        .collect();

    let coinvariant_warning = match (&spec.variant, action) {
        (Variant::Coinvariant(_), Some(a)) => {
            // order of the group acting on chains: points and coefficient
            // signs together, closed by word enumeration
            let mut seen: BTreeSet<(Vec<Option<PointId>>, Vec<(usize, i8)>)> = BTreeSet::new();
            let id_pts: Vec<Option<PointId>> =
                (0..a.n_points() as u32).map(|i| Some(PointId(i))).collect();
            let id_perm = SignedPerm::identity(rank).images;
            seen.insert((id_pts.clone(), id_perm.clone()));
            let mut frontier = vec![(id_pts, id_perm)];
            let mut closed = a.generators.is_empty();
            for _ in 0..DEFAULT_WORD_CAP {
                let mut next = Vec::new();
                for (pts, perm) in &frontier {
                    for (gi, g) in a.generators.iter().enumerate() {
                        let _ = gi;
                        for inv in [false, true] {
                            let step_pts: Vec<Option<PointId>> = pts
                                .iter()
                                .map(|p| {
                                    p.and_then(|q| {
                                        if inv { g.backward[q.idx()] } else { g.forward[q.idx()] }
                                    })
                                })
                                .collect();
                            let step = spec.coeffs.letter_perm(&g.name, inv);
                            let step_perm: Vec<(usize, i8)> = perm
                                .iter()
                                .map(|&(img, sign)| {
                                    let (img2, sign2) = step.images[img];
                                    (img2, sign * sign2)
                                })
                                .collect();
                            let state = (step_pts, step_perm);
                            if seen.insert(state.clone()) {
                                next.push(state);
                            }
                        }
                    }
                }
                if next.is_empty() {
                    closed = true;
                    break;
                }
                frontier = next;
            }
            let order = seen.len() as u64;
            match spec.coeffs.ring {
                Ring::Z => order > 1 || !closed,
                Ring::Fp(p) => !closed || order % p == 0,
                Ring::Q => false,
            }
        }
        _ => false,
    };
    let build = |diffs: Vec<IMat>,
                 degrees: Vec<DegreeData>,
                 relations: Vec<Option<IMat>>,
                 embeddings: Vec<Option<IMat>>| GradedComplex {
        ring: spec.coeffs.ring,
        kind: spec.kind,
        coeff_rank: rank,
        level: spec.level,
        p_max: spec.p_max,
        degrees,
        diffs,
        relations,
        embeddings,
        coinvariant_warning,
    };

    match (&spec.variant, spec.kind) {
        (Variant::Plain, ComplexKind::Chain) => {
            let n = boundaries.len();
            Ok(build(boundaries, degrees_plain, vec![None; n], vec![None; n]))
        }
        (Variant::Plain, ComplexKind::Cochain) => {
            // δ_p = (∂_{p+1})^T; the top degree has no assembled outgoing map
            let mut diffs = Vec::with_capacity(spec.p_max + 1);
            for p in 0..=spec.p_max {
                if p < spec.p_max {
                    diffs.push(boundaries[p + 1].transpose());
                } else {
                    diffs.push(IMat::zeros(0, kept[p].len() * rank));
                }
            }
            let n = diffs.len();
            Ok(build(diffs, degrees_plain, vec![None; n], vec![None; n]))
        }
        (Variant::Invariant(_), ComplexKind::Chain) => {
            // fixed sublattice per degree, boundary restricted
            let mut embeddings: Vec<IMat> = Vec::with_capacity(spec.p_max + 1);
            for p in 0..=spec.p_max {
                let dim = kept[p].len() * rank;
                let mats = &action_mats[p];
                if mats.is_empty() {
                    embeddings.push(IMat::identity(dim));
                    continue;
                }
                // kernel of stacked (A_g − I)
                let mut stacked = IMat::zeros(dim * mats.len(), dim);
                for (gi, m) in mats.iter().enumerate() {
                    for i in 0..dim {
                        for j in 0..dim {
                            let v =
                                m.get(i, j) - if i == j { BigInt::one() } else { BigInt::zero() };
                            stacked.set(gi * dim + i, j, v);
                        }
                    }
                }
                let basis = match spec.coeffs.ring {
                    Ring::Z | Ring::Q => crate::linalg::kernel(&stacked),
                    Ring::Fp(p_mod) => fp_kernel_int(&stacked, p_mod),
                };
                embeddings.push(IMat::from_columns(dim, &basis));
            }
            let mut diffs = Vec::with_capacity(spec.p_max + 1);
            diffs.push(IMat::zeros(0, embeddings[0].cols));
            for p in 1..=spec.p_max {
                let image = boundaries[p].mul(&embeddings[p]);
                let restricted = express_in_columns(&embeddings[p - 1], &image, spec.coeffs.ring)
                    .ok_or(CoarseError::NotChainMap(p))?;
                diffs.push(restricted);
            }
            verify_square_zero(&diffs)?;
            let degrees: Vec<DegreeData> = embeddings
                .iter()
                .zip(&kept)
                .map(|(e, ts)| DegreeData {
                    dim: e.cols,
                    tuples: None,
                    ambient_tuples: Some(ts.clone()),
                })
                .collect();
            let n = diffs.len();
            Ok(build(diffs, degrees, vec![None; n], embeddings.into_iter().map(Some).collect()))
        }
        (Variant::Coinvariant(_), ComplexKind::Cochain) => {
            // cochain complex with relation lattices spanned by (A_g^T − I)
            let mut diffs = Vec::with_capacity(spec.p_max + 1);
            for p in 0..=spec.p_max {
                if p < spec.p_max {
                    diffs.push(boundaries[p + 1].transpose());
                } else {
                    diffs.push(IMat::zeros(0, kept[p].len() * rank));
                }
            }
            let mut relations: Vec<Option<IMat>> = Vec::with_capacity(spec.p_max + 1);
            for p in 0..=spec.p_max {
                let dim = kept[p].len() * rank;
                let mats = &action_mats[p];
                if mats.is_empty() {
                    relations.push(None);
                    continue;
                }
                let mut rel = IMat::zeros(dim, dim * mats.len());
                for (gi, m) in mats.iter().enumerate() {
                    // cochains transform by the transpose of the chain action
                    let mt = m.transpose();
                    for i in 0..dim {
                        for j in 0..dim {
                            let v =
                                mt.get(i, j) - if i == j { BigInt::one() } else { BigInt::zero() };
                            rel.set(i, gi * dim + j, v);
                        }
                    }
                }
                relations.push(Some(rel));
            }
            let n = diffs.len();
            Ok(build(diffs, degrees_plain, relations, vec![None; n]))
        }
        _ => Err(CoarseError::Unsupported("variant and kind do not combine".into())),
    }
}

fn verify_square_zero(diffs: &[IMat]) -> Result<()> {
    for p in 2..diffs.len() {
        if !diffs[p - 1].mul(&diffs[p]).is_zero() {
            return Err(CoarseError::CompositeNonzero(p));
        }
    }
    Ok(())
}

/// Solve `B X = M` columnwise over the ring (`B` with independent columns).
fn express_in_columns(b: &IMat, m: &IMat, ring: Ring) -> Option<IMat> {
    match ring {
        Ring::Z | Ring::Q => {
            let snf = crate::linalg::smith(b, crate::linalg::SnfWant::uv());
            let mut out = IMat::zeros(b.cols, m.cols);
            for j in 0..m.cols {
                let col = m.column(j);
                let x = crate::linalg::solve(&snf, &col)?;
                for i in 0..b.cols {
                    out.set(i, j, x[i].clone());
                }
            }
            Some(out)
        }
        Ring::Fp(p) => {
            use crate::linalg::{FMat, Fp};
            let sample = Fp::new(0, p);
            let bf = FMat::from_int(b.rows, b.cols, |i, j| b.get(i, j).clone(), &sample);
            let mut out = IMat::zeros(b.cols, m.cols);
            for j in 0..m.cols {
                let col: Vec<Fp> = (0..m.rows).map(|i| Fp::from_big(m.get(i, j), p)).collect();
                let x = bf.solve(&col)?;
                for i in 0..b.cols {
                    out.set(i, j, BigInt::from(x[i].v));
                }
            }
            Some(out)
        }
    }
}

/// Kernel basis over `F_p`, lifted to integer columns with entries in `0..p`.
fn fp_kernel_int(m: &IMat, p: u64) -> Vec<Vec<BigInt>> {
    use crate::linalg::{FMat, Fp};
    let sample = Fp::new(0, p);
    let mf = FMat::from_int(m.rows, m.cols, |i, j| m.get(i, j).clone(), &sample);
    mf.kernel()
        .into_iter()
        .map(|col| col.into_iter().map(|x| BigInt::from(x.v)).collect())
        .collect()
}

// ---------------------------------------------------------------------------
// prisms

/// Generalized prism operator on chains: subdivide each tuple along the
/// merged schedule and push through the homotopy.
pub fn prism_homology(
    cylinder: &Cylinder,
    schedule: &SubdivisionSchedule,
    h_assignment: &[PointId],
    c: &CoarseChain,
) -> CoarseChain {
    let mut out = CoarseChain::zero(c.degree + 1, c.level);
    for (t, v) in &c.coeffs {
        for step in merge_tuple(schedule, t) {
            let img: Tuple = step
                .entries
                .iter()
                .map(|&(x, tick)| h_assignment[cylinder.point(x, tick).idx()])
                .collect();
            let sign = if step.pivot % 2 == 0 { v.clone() } else { -v.clone() };
            out.add_term(img, sign);
        }
    }
    out.normalized()
}

/// Cochain prism, oriented so that `δP + Pδ = f* − g*`: the negated adjoint
/// of the chain prism.
pub fn prism_cohomology(
    source: &CoarseSpace,
    allowed: Option<&BTreeSet<PointId>>,
    level: usize,
    cylinder: &Cylinder,
    schedule: &SubdivisionSchedule,
    h_assignment: &[PointId],
    phi: CochainExpr<'_>,
    cap: usize,
) -> Result<CoarseCochain> {
    let degree = phi.degree() - 1;
    let tuples = enumerate_tuples(source, allowed, level, degree, cap)?;
    let mut out = CoarseCochain::zero(degree, level);
    for t in tuples {
        let mut acc = BigInt::zero();
        for step in merge_tuple(schedule, &t) {
            let img: Tuple = step
                .entries
                .iter()
                .map(|&(x, tick)| h_assignment[cylinder.point(x, tick).idx()])
                .collect();
            let v = phi.eval(&img);
            if step.pivot % 2 == 0 {
                acc -= v;
            } else {
                acc += v;
            }
        }
        if !Zero::is_zero(&acc) {
            out.values.insert(t, acc);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// flasque contraction

/// Cone over the forward orbit of φ:
/// `s(x_0,…,x_p) = Σ_{n<N} Σ_i (−1)^i (φ^{n+1}x_0,…,φ^{n+1}x_i, φ^n x_i,…,φ^n x_p)`.
///
/// Satisfies `∂s + s∂ = id − (φ^N)_*` exactly; rel a collar containing the
/// image of `φ^N` this is the identity. Trajectories must stay in the window.
pub fn flasque_contraction(
    phi: &[Option<PointId>],
    c: &CoarseChain,
    horizon: usize,
) -> Result<CoarseChain> {
    let iterate = |p: PointId, n: usize| -> Result<PointId> {
        let mut cur = p;
        for step in 0..n {
            cur = phi[cur.idx()].ok_or(CoarseError::HorizonInsufficient(p.idx(), step))?;
        }
        Ok(cur)
    };
    let mut out = CoarseChain::zero(c.degree + 1, c.level);
    for (t, v) in &c.coeffs {
        for n in 0..horizon {
            for i in 0..t.len() {
                let mut entries = Vec::with_capacity(t.len() + 1);
                for &x in t.iter().take(i + 1) {
                    entries.push(iterate(x, n + 1)?);
                }
                for &x in t.iter().skip(i) {
                    entries.push(iterate(x, n)?);
                }
                let sign = if i % 2 == 0 { v.clone() } else { -v.clone() };
                out.add_term(entries, sign);
            }
        }
    }
    Ok(out.normalized())
}

/// Apply `φ^n` entrywise to a chain.
pub fn iterate_chain(phi: &[Option<PointId>], c: &CoarseChain, n: usize) -> Result<CoarseChain> {
    let mut out = CoarseChain::zero(c.degree, c.level);
    for (t, v) in &c.coeffs {
        let img: Result<Tuple> = t
            .iter()
            .map(|&x| {
                let mut cur = x;
                for step in 0..n {
                    cur = phi[cur.idx()]
                        .ok_or(CoarseError::HorizonInsufficient(x.idx(), step))?;
                }
                Ok(cur)
            })
            .collect();
        out.add_term(img?, v.clone());
    }
    Ok(out.normalized())
}

// ---------------------------------------------------------------------------
// excision retraction

/// The patched retraction `r: X → X∖C`: identity outside `C`, points of `C`
/// snap to a nearby point of `A∖C` chosen by the excisiveness witnesses.
#[derive(Debug)]
pub struct Retraction {
    pub map: Vec<PointId>,
    /// For each point of `C`: its penumbra shell of `X∖C` and the level
    /// within which its image sits.
    pub shells: BTreeMap<PointId, (usize, usize)>,
    /// Least target level covering the graph of `r` on each `Pen_{E_n}(X∖C)`.
    pub controlled_on_penumbras: Vec<Option<usize>>,
    pub equivariant: Option<bool>,
}

/// Build the retraction for an excisive pair `C ⊆ A ⊆ X`.
pub fn excision_retraction(
    space: &CoarseSpace,
    a: &SubsetRef,
    c: &SubsetRef,
    action: Option<&GroupAction>,
) -> Result<Retraction> {
    if !c.members.is_subset(&a.members) {
        return Err(CoarseError::Unsupported("C must sit inside A".into()));
    }
    let complement = SubsetRef {
        members: space.points().filter(|p| !c.contains(*p)).collect(),
    };
    let a_minus_c = a.minus(c);
    // witnesses: A ∩ Pen_{E_n}(X∖C) ⊆ Pen_{E_m(n)}(A∖C)
    let mut shell_witness = Vec::with_capacity(space.depth() + 1);
    for n in 0..=space.depth() {
        let pen = crate::space::penumbra(space.chain().level(n), &complement.members);
        let lhs: BTreeSet<PointId> = pen.intersection(&a.members).copied().collect();
        let mut found = None;
        for m in 0..=space.depth() {
            let rhs = crate::space::penumbra(space.chain().level(m), &a_minus_c.members);
            if lhs.is_subset(&rhs) {
                found = Some(m);
                break;
            }
        }
        shell_witness.push(found.ok_or(CoarseError::NotExcisive(n))?);
    }

    // shell index: least n with x ∈ Pen_{E_n}(X∖C)
    let shell_of = |x: PointId| -> Option<usize> {
        (0..=space.depth()).find(|&n| {
            crate::space::penumbra(space.chain().level(n), &complement.members).contains(&x)
        })
    };

    let pick_image = |x: PointId, m_level: usize| -> Option<(PointId, usize)> {
        let mut best: Option<(usize, PointId)> = None;
        for &y in &a_minus_c.members {
            if let Some(l) = space.chain().level_of_pair(x, y) {
                if l <= m_level && best.map_or(true, |(bl, by)| (l, y) < (bl, by)) {
                    best = Some((l, y));
                }
            }
        }
        best.map(|(l, y)| (y, l))
    };

    let mut map: Vec<PointId> = space.points().collect();
    let mut shells = BTreeMap::new();
    match action {
        None => {
            for &x in &c.members {
                let n = shell_of(x).ok_or(CoarseError::NotExcisive(space.depth()))?;
                let (y, l) = pick_image(x, shell_witness[n]).ok_or(CoarseError::NotExcisive(n))?;
                map[x.idx()] = y;
                shells.insert(x, (n, l));
            }
        }
        Some(action) => {
            let report = check_action(action, space, DEFAULT_WORD_CAP)?;
            if !report.passes_equivariant_gate() {
                return Err(CoarseError::NotIsocoarse(0));
            }
            let (elements, _) = action.enumerate_elements(DEFAULT_WORD_CAP);
            let mut done: BTreeSet<PointId> = BTreeSet::new();
            for &x in &c.members {
                if done.contains(&x) {
                    continue;
                }
                let orb = action.orbit(x, &elements);
                done.extend(orb.iter().copied());
                if !orb.iter().all(|p| c.contains(*p)) {
                    return Err(CoarseError::Unsupported("C not action invariant".into()));
                }
                let n = shell_of(x).ok_or(CoarseError::NotExcisive(space.depth()))?;
                let (y, l) = pick_image(x, shell_witness[n]).ok_or(CoarseError::NotExcisive(n))?;
                for el in &elements {
                    if let (Some(xg), Some(yg)) = (el.apply(x), el.apply(y)) {
                        map[xg.idx()] = yg;
                        shells.insert(xg, (n, l));
                    }
                }
            }
        }
    }

    // controlledness of r on each penumbra of X∖C
    let mut controlled_on_penumbras = Vec::with_capacity(space.depth() + 1);
    for n in 0..=space.depth() {
        let pen = crate::space::penumbra(space.chain().level(n), &complement.members);
        let mut worst = Some(0usize);
        for (p, q) in space.chain().level(n).iter() {
            if !pen.contains(&p) || !pen.contains(&q) {
                continue;
            }
            match space.chain().level_of_pair(map[p.idx()], map[q.idx()]) {
                Some(m) => worst = worst.map(|w| w.max(m)),
                None => worst = None,
            }
        }
        controlled_on_penumbras.push(worst);
    }

    let equivariant = action.map(|action| {
        let (elements, _) = action.enumerate_elements(DEFAULT_WORD_CAP);
        space.points().all(|x| {
            elements.iter().all(|el| match el.apply(x) {
                Some(xg) => el.apply(map[x.idx()]) == Some(map[xg.idx()]),
                None => true,
            })
        })
    });

    Ok(Retraction { map, shells, controlled_on_penumbras, equivariant })
}

/// The retraction's cochain prism
/// `P(φ)(x_0,…,x_{p−1}) = Σ_l (−1)^l φ(x_0,…,x_l, r(x_l),…,r(x_{p−1}))`,
/// satisfying `δP + Pδ = r^* − id` over the enumerated tuple domain.
pub fn retraction_prism(
    space: &CoarseSpace,
    allowed: Option<&BTreeSet<PointId>>,
    level: usize,
    r: &[PointId],
    phi: CochainExpr<'_>,
    cap: usize,
) -> Result<CoarseCochain> {
    let degree = phi.degree() - 1;
    let tuples = enumerate_tuples(space, allowed, level, degree, cap)?;
    let mut out = CoarseCochain::zero(degree, level);
    for t in tuples {
        let mut acc = BigInt::zero();
        for l in 0..t.len() {
            let mut arg: Tuple = Vec::with_capacity(t.len() + 1);
            arg.extend_from_slice(&t[..=l]);
            arg.extend(t[l..].iter().map(|&x| r[x.idx()]));
            let v = phi.eval(&arg);
            if l % 2 == 0 {
                acc += v;
            } else {
                acc -= v;
            }
        }
        if !Zero::is_zero(&acc) {
            out.values.insert(t, acc);
        }
    }
    Ok(out)
}

/// Pull a cochain back along a point map.
pub fn pullback_cochain(
    space: &CoarseSpace,
    allowed: Option<&BTreeSet<PointId>>,
    level: usize,
    f: &[PointId],
    phi: &CoarseCochain,
    cap: usize,
) -> Result<CoarseCochain> {
    let tuples = enumerate_tuples(space, allowed, level, phi.degree, cap)?;
    let mut out = CoarseCochain::zero(phi.degree, level);
    for t in tuples {
        let img: Tuple = t.iter().map(|&x| f[x.idx()]).collect();
        let v = phi.eval(&img);
        if !Zero::is_zero(&v) {
            out.values.insert(t, v);
        }
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::homotopy::{build_cylinder, derive_schedule, IntervalGrid, NeighborhoodFamily};
    use crate::space::tests::line;

    fn pid(v: u32) -> PointId {
        PointId(v)
    }

    #[test]
    fn boundary_formula_is_alternating() {
        let c = CoarseChain::generator(vec![pid(0), pid(1)], 1);
        let b = apply_boundary(&c);
        assert_eq!(b.coeffs.get(&vec![pid(1)]), Some(&BigInt::from(1)));
        assert_eq!(b.coeffs.get(&vec![pid(0)]), Some(&BigInt::from(-1)));
        // repeated entries cancel in degree 1
        let cc = CoarseChain::generator(vec![pid(0), pid(0)], 0);
        assert!(apply_boundary(&cc).is_zero());
        // degree 2
        let c2 = CoarseChain::generator(vec![pid(0), pid(1), pid(2)], 1);
        let b2 = apply_boundary(&c2);
        assert_eq!(b2.coeffs.get(&vec![pid(1), pid(2)]), Some(&BigInt::from(1)));
        assert_eq!(b2.coeffs.get(&vec![pid(0), pid(2)]), Some(&BigInt::from(-1)));
        assert_eq!(b2.coeffs.get(&vec![pid(0), pid(1)]), Some(&BigInt::from(1)));
        // degree 0 goes to zero by convention
        assert!(apply_boundary(&CoarseChain::generator(vec![pid(0)], 0)).is_zero());
    }

    #[test]
    fn boundary_squares_to_zero_exhaustively() {
        let s = line(0, 4, &[0.0, 1.0, 2.0]);
        let tuples = enumerate_tuples(&s, None, 1, 2, 10_000).unwrap();
        for t in tuples {
            let c = CoarseChain::generator(t, 1);
            assert!(apply_boundary(&apply_boundary(&c)).is_zero());
        }
    }

    #[test]
    fn coboundary_of_constant_vanishes() {
        let s = line(0, 3, &[0.0, 1.0]);
        let mut phi = CoarseCochain::zero(0, 1);
        for p in s.points() {
            phi.values.insert(vec![p], BigInt::from(5));
        }
        let d = apply_coboundary(&s, None, &phi, 10_000).unwrap();
        assert!(d.is_zero());
        // on degree-0 indicators the formula is a difference
        let psi = CoarseCochain::indicator(vec![pid(1)], 1);
        let dpsi = apply_coboundary(&s, None, &psi, 10_000).unwrap();
        assert_eq!(dpsi.eval(&vec![pid(0), pid(1)]), BigInt::from(1));
        assert_eq!(dpsi.eval(&vec![pid(1), pid(0)]), BigInt::from(-1));
    }

    #[test]
    fn coboundary_squares_to_zero() {
        let s = line(0, 4, &[0.0, 1.0, 2.0]);
        let tuples = enumerate_tuples(&s, None, 1, 0, 10_000).unwrap();
        for t in tuples {
            let phi = CoarseCochain::indicator(t, 1);
            let d = apply_coboundary(&s, None, &phi, 10_000).unwrap();
            let dd = apply_coboundary(&s, None, &d, 10_000).unwrap();
            assert!(dd.is_zero());
        }
    }

    #[test]
    fn plain_assembly_counts_two_point_space() {
        let s = line(0, 1, &[0.0, 1.0]);
        let coeffs = CoefficientModule::trivial(Ring::Z).unwrap();
        let cx = assemble(&AssembleSpec::plain(&s, 1, 1, &coeffs, ComplexKind::Chain)).unwrap();
        assert_eq!(cx.dim(0), 2);
        assert_eq!(cx.dim(1), 4);
        // relative to {1}: degree 0 loses (1), degree 1 loses only (1,1)
        let a = s.subset([pid(1)]).unwrap();
        let mut spec = AssembleSpec::plain(&s, 1, 1, &coeffs, ComplexKind::Chain);
        spec.relative = Some(&a);
        let rel = assemble(&spec).unwrap();
        assert_eq!(rel.dim(0), 1);
        assert_eq!(rel.dim(1), 3);
    }

    #[test]
    fn invariant_assembly_of_the_swap() {
        // swap on two far points, trivial coefficients: invariant rank 1
        let s = line(0, 1, &[0.0, 1.0]);
        let forward = vec![Some(pid(1)), Some(pid(0))];
        let g = crate::maps::ActionGenerator::new("s", 2, forward).unwrap();
        let action = GroupAction::new(2, vec![g], vec![], BTreeMap::new()).unwrap();
        let coeffs = CoefficientModule::trivial(Ring::Z).unwrap();
        let mut spec = AssembleSpec::plain(&s, 1, 1, &coeffs, ComplexKind::Chain);
        spec.variant = Variant::Invariant(&action);
        let cx = assemble(&spec).unwrap();
        assert_eq!(cx.dim(0), 1, "m_0 = m_1 pins one degree of freedom");
    }

    pub fn shift_homotopy_setup() -> (
        CoarseSpace,
        CoarseSpace,
        Cylinder,
        SubdivisionSchedule,
        Vec<PointId>,
        Vec<PointId>,
        Vec<PointId>,
    ) {
        let x = line(-6, 6, &[0.0, 1.0, 2.0, 3.0]);
        let y = line(-6, 9, &(0..=8).map(f64::from).collect::<Vec<_>>());
        let grid = IntervalGrid::range(-1, 4).unwrap();
        let family = NeighborhoodFamily::new(&grid, x.len(), |_| {
            let mut u = BTreeSet::new();
            for (a, &ta) in grid.ticks.iter().enumerate() {
                for (b, &tb) in grid.ticks.iter().enumerate() {
                    if (ta < 0 && tb < 0) || (ta > 3 && tb > 3) {
                        u.insert((a, b));
                    }
                }
            }
            u
        })
        .unwrap();
        let cyl = build_cylinder(&x, &grid, &family, 2).unwrap();
        let schedule = derive_schedule(&grid, &family, None).unwrap();
        let mut h = vec![pid(0); cyl.space.len()];
        for p in x.points() {
            for (ti, &t) in grid.ticks.iter().enumerate() {
                let v: i64 = x.label(p).parse().unwrap();
                h[cyl.point(p, ti).idx()] =
                    y.index_of_label(&(v + t.clamp(0, 3)).to_string()).unwrap();
            }
        }
        let f: Vec<PointId> =
            x.points().map(|p| y.index_of_label(x.label(p)).unwrap()).collect();
        let g: Vec<PointId> = x
            .points()
            .map(|p| {
                let v: i64 = x.label(p).parse().unwrap();
                y.index_of_label(&(v + 3).to_string()).unwrap()
            })
            .collect();
        (x, y, cyl, schedule, h, f, g)
    }

    #[test]
    fn prism_identity_on_chains() {
        let (x, _y, cyl, schedule, h, f, g) = shift_homotopy_setup();
        // exhaustive over degree 0 and 1 basis tuples at level 1
        for degree in 0..=1usize {
            let tuples = enumerate_tuples(&x, None, 1, degree, 100_000).unwrap();
            for t in tuples {
                let c = CoarseChain::generator(t, 1);
                let lhs = apply_boundary(&prism_homology(&cyl, &schedule, &h, &c))
                    .add(&prism_homology(&cyl, &schedule, &h, &apply_boundary(&c)));
                let rhs = c.mapped(|p| g[p.idx()]).sub(&c.mapped(|p| f[p.idx()]));
                assert_eq!(lhs, rhs, "∂P + P∂ = g_* − f_* failed");
            }
        }
    }

    #[test]
    fn prism_of_zero_is_zero() {
        let (_x, _y, cyl, schedule, h, _f, _g) = shift_homotopy_setup();
        let z = CoarseChain::zero(0, 1);
        assert!(prism_homology(&cyl, &schedule, &h, &z).is_zero());
    }

    #[test]
    fn prism_on_degree_zero_telescopes() {
        let (x, y, cyl, schedule, h, _f, _g) = shift_homotopy_setup();
        let zero = x.index_of_label("0").unwrap();
        let c = CoarseChain::generator(vec![zero], 1);
        let p = prism_homology(&cyl, &schedule, &h, &c);
        let b = apply_boundary(&p);
        let three = y.index_of_label("3").unwrap();
        let zero_y = y.index_of_label("0").unwrap();
        let mut expected = CoarseChain::zero(0, 1);
        expected.add_term(vec![three], BigInt::one());
        expected.add_term(vec![zero_y], -BigInt::one());
        assert_eq!(b, expected.normalized());
    }

    #[test]
    fn cochain_prism_identity() {
        let (x, y, cyl, schedule, h, f, g) = shift_homotopy_setup();
        // δP + Pδ = f* − g* on degree-1 indicator cochains over Y
        let y_tuples = enumerate_tuples(&y, None, 2, 1, 100_000).unwrap();
        for yt in y_tuples.into_iter().step_by(7) {
            let phi = CoarseCochain::indicator(yt, 2);
            let p_phi =
                prism_cohomology(&x, None, 1, &cyl, &schedule, &h, CochainExpr::Plain(&phi), 100_000)
                    .unwrap();
            let d_p = apply_coboundary(&x, None, &p_phi, 100_000).unwrap();
            let p_d = prism_cohomology(
                &x,
                None,
                1,
                &cyl,
                &schedule,
                &h,
                CochainExpr::Coboundary(&phi),
                100_000,
            )
            .unwrap();
            let lhs = {
                let mut sum = d_p.clone();
                for (t, v) in &p_d.values {
                    let e = sum.values.entry(t.clone()).or_insert_with(BigInt::zero);
                    *e += v;
                }
                sum.normalized()
            };
            let f_star = pullback_cochain(&x, None, 1, &f, &phi, 100_000).unwrap();
            let g_star = pullback_cochain(&x, None, 1, &g, &phi, 100_000).unwrap();
            let rhs = f_star.sub(&g_star);
            assert_eq!(lhs, rhs, "δP + Pδ = f* − g* failed");
        }
    }

    #[test]
    fn flasque_contraction_telescopes_on_the_ray() {
        let s = crate::homotopy::tests::ray_window(30, &[0.0, 1.0, 2.0, 3.0]);
        let phi: Vec<Option<PointId>> = s
            .points()
            .map(|p| {
                let v: i64 = s.label(p).parse().unwrap();
                s.index_of_label(&(v + 1).to_string())
            })
            .collect();
        let c = CoarseChain::generator(vec![s.index_of_label("0").unwrap()], 1);
        let n = 25;
        let s_c = flasque_contraction(&phi, &c, n).unwrap();
        let lhs =
            apply_boundary(&s_c).add(&flasque_contraction(&phi, &apply_boundary(&c), n).unwrap());
        // ∂s + s∂ = id − (φ^N)_* exactly
        let rhs = c.sub(&iterate_chain(&phi, &c, n).unwrap());
        assert_eq!(lhs, rhs);
        // and rel a collar swallowing φ^N(0) = 25 it is the identity
        let collar: BTreeSet<PointId> =
            s.subset_where(|l| l.parse::<i64>().unwrap() >= 25).members;
        let drop_collar = |ch: &CoarseChain| {
            let mut out = ch.clone();
            out.coeffs.retain(|t, _| !t.iter().all(|x| collar.contains(x)));
            out
        };
        assert_eq!(drop_collar(&lhs), drop_collar(&c));
    }

    #[test]
    fn flasque_contraction_identity_in_degree_one() {
        let s = crate::homotopy::tests::ray_window(40, &[0.0, 1.0, 2.0, 3.0]);
        let phi: Vec<Option<PointId>> = s
            .points()
            .map(|p| {
                let v: i64 = s.label(p).parse().unwrap();
                s.index_of_label(&(v + 1).to_string())
            })
            .collect();
        let a = s.index_of_label("2").unwrap();
        let b = s.index_of_label("3").unwrap();
        for t in [vec![a, b], vec![a, a], vec![b, a]] {
            let c = CoarseChain::generator(t, 1);
            let n = 30;
            let s_c = flasque_contraction(&phi, &c, n).unwrap();
            let lhs = apply_boundary(&s_c)
                .add(&flasque_contraction(&phi, &apply_boundary(&c), n).unwrap());
            let rhs = c.sub(&iterate_chain(&phi, &c, n).unwrap());
            assert_eq!(lhs, rhs);
        }
        // zero chain stays zero
        assert!(flasque_contraction(&phi, &CoarseChain::zero(1, 1), 5).unwrap().is_zero());
    }

    #[test]
    fn flasque_contraction_reports_escape() {
        let s = crate::homotopy::tests::ray_window(5, &[0.0, 1.0]);
        let phi: Vec<Option<PointId>> = s
            .points()
            .map(|p| {
                let v: i64 = s.label(p).parse().unwrap();
                s.index_of_label(&(v + 1).to_string())
            })
            .collect();
        let c = CoarseChain::generator(vec![s.index_of_label("3").unwrap()], 1);
        assert!(matches!(
            flasque_contraction(&phi, &c, 10),
            Err(CoarseError::HorizonInsufficient(..))
        ));
    }

    #[test]
    fn retraction_is_identity_for_empty_c() {
        let s = line(-5, 5, &[0.0, 1.0, 2.0]);
        let a = s.subset_where(|l| l.parse::<i64>().unwrap() <= 0);
        let c = SubsetRef::empty();
        let r = excision_retraction(&s, &a, &c, None).unwrap();
        assert!(s.points().all(|p| r.map[p.idx()] == p));
    }

    #[test]
    fn retraction_clamps_the_deep_half_line() {
        let s = line(-20, 20, &(0..=12).map(f64::from).collect::<Vec<_>>());
        let a = s.subset_where(|l| l.parse::<i64>().unwrap() <= 0);
        let c = s.subset_where(|l| l.parse::<i64>().unwrap() <= -10);
        let r = excision_retraction(&s, &a, &c, None).unwrap();
        for p in s.points() {
            let v: i64 = s.label(p).parse().unwrap();
            if v > -10 {
                assert_eq!(r.map[p.idx()], p, "identity outside C");
            } else {
                let image: i64 = s.label(r.map[p.idx()]).parse().unwrap();
                assert!(image > -10 && image <= 0, "image lands in A∖C, got {image}");
            }
        }
        assert!(r.controlled_on_penumbras.iter().all(Option::is_some));
    }

    #[test]
    fn retraction_prism_identity() {
        let s = line(-12, 12, &(0..=8).map(f64::from).collect::<Vec<_>>());
        let a = s.subset_where(|l| l.parse::<i64>().unwrap() <= 0);
        let c = s.subset_where(|l| l.parse::<i64>().unwrap() <= -6);
        let r = excision_retraction(&s, &a, &c, None).unwrap();
        // δP + Pδ = r* − id on degree-1 indicators
        let tuples = enumerate_tuples(&s, None, 1, 1, 100_000).unwrap();
        for t in tuples.into_iter().step_by(5) {
            let phi = CoarseCochain::indicator(t, 1);
            let p_phi =
                retraction_prism(&s, None, 1, &r.map, CochainExpr::Plain(&phi), 100_000).unwrap();
            let d_p = apply_coboundary(&s, None, &p_phi, 100_000).unwrap();
            let p_d =
                retraction_prism(&s, None, 1, &r.map, CochainExpr::Coboundary(&phi), 100_000)
                    .unwrap();
            let mut lhs = d_p.clone();
            for (t2, v) in &p_d.values {
                let e = lhs.values.entry(t2.clone()).or_insert_with(BigInt::zero);
                *e += v;
            }
            let lhs = lhs.normalized();
            let r_star = pullback_cochain(&s, None, 1, &r.map, &phi, 100_000).unwrap();
            let rhs = r_star.sub(&phi);
            assert_eq!(lhs, rhs, "retraction prism identity failed");
        }
    }

    #[test]
    fn assemble_verifies_square_zero() {
        let s = line(0, 3, &[0.0, 1.0, 2.0]);
        let coeffs = CoefficientModule::trivial(Ring::Z).unwrap();
        for kind in [ComplexKind::Chain, ComplexKind::Cochain] {
            let cx = assemble(&AssembleSpec::plain(&s, 1, 3, &coeffs, kind)).unwrap();
            match kind {
                ComplexKind::Chain => {
                    for p in 2..=3 {
                        assert!(cx.diffs[p - 1].mul(&cx.diffs[p]).is_zero());
                    }
                }
                ComplexKind::Cochain => {
                    for p in 0..2 {
                        assert!(cx.diffs[p + 1].mul(&cx.diffs[p]).is_zero());
                    }
                }
            }
        }
    }
}
