//! Finite presentations of coarse spaces: point tables, entourages, and
//! normalized entourage chains, together with the entourage algebra
//! (inverse, composition, penumbras, boundedness, products, excisiveness).
//!
//! Every answer is relative to the chain depth of the presentation. An
//! `Ambient` tag records whether the presentation is the whole space or a
//! window of an infinite family that can be regenerated at a larger radius.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{CoarseError, Result};

/// Index into a space's point table. Stable for the lifetime of the space.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct PointId(pub u32);

impl PointId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

/// A finite set of ordered point pairs over a fixed point table.
///
/// Pairs are kept sorted and deduplicated, so iteration order, witnesses and
/// everything derived from them are deterministic.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Entourage {
    n_points: usize,
    pairs: BTreeSet<(PointId, PointId)>,
}

impl Entourage {
    pub fn empty(n_points: usize) -> Self {
        Entourage { n_points, pairs: BTreeSet::new() }
    }

    pub fn diagonal(n_points: usize) -> Self {
        let pairs = (0..n_points as u32).map(|i| (PointId(i), PointId(i))).collect();
        Entourage { n_points, pairs }
    }

    pub fn from_pairs(n_points: usize, iter: impl IntoIterator<Item = (PointId, PointId)>) -> Result<Self> {
        let mut pairs = BTreeSet::new();
        for (a, b) in iter {
            if a.idx() >= n_points {
                return Err(CoarseError::PointOutOfRange(a.idx(), n_points));
            }
            if b.idx() >= n_points {
                return Err(CoarseError::PointOutOfRange(b.idx(), n_points));
            }
            pairs.insert((a, b));
        }
        Ok(Entourage { n_points, pairs })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, a: PointId, b: PointId) -> bool {
        self.pairs.contains(&(a, b))
    }

    pub fn iter(&self) -> impl Iterator<Item = (PointId, PointId)> + '_ {
        self.pairs.iter().copied()
    }

    /// All `y` with `(x, y)` in the entourage.
    pub fn successors(&self, x: PointId) -> impl Iterator<Item = PointId> + '_ {
        self.pairs
            .range((x, PointId(0))..=(x, PointId(u32::MAX)))
            .map(|&(_, y)| y)
    }

    /// Pair-reversed relation. Involutive.
    pub fn inverse(&self) -> Entourage {
        let pairs = self.pairs.iter().map(|&(a, b)| (b, a)).collect();
        Entourage { n_points: self.n_points, pairs }
    }

    /// `{(x,z) | ∃y: (x,y) ∈ self ∧ (y,z) ∈ other}`.
    pub fn compose(&self, other: &Entourage) -> Result<Entourage> {
        if self.n_points != other.n_points {
            return Err(CoarseError::TableMismatch(self.n_points, other.n_points));
        }
        let mut by_first: BTreeMap<PointId, Vec<PointId>> = BTreeMap::new();
        for (y, z) in other.iter() {
            by_first.entry(y).or_default().push(z);
        }
        let mut pairs = BTreeSet::new();
        for (x, y) in self.iter() {
            if let Some(zs) = by_first.get(&y) {
                for &z in zs {
                    pairs.insert((x, z));
                }
            }
        }
        Ok(Entourage { n_points: self.n_points, pairs })
    }

    pub fn union(&self, other: &Entourage) -> Result<Entourage> {
        if self.n_points != other.n_points {
            return Err(CoarseError::TableMismatch(self.n_points, other.n_points));
        }
        let pairs = self.pairs.union(&other.pairs).copied().collect();
        Ok(Entourage { n_points: self.n_points, pairs })
    }

    pub fn is_subset(&self, other: &Entourage) -> bool {
        self.pairs.is_subset(&other.pairs)
    }

    pub fn symmetrize(&self) -> Entourage {
        let mut pairs = self.pairs.clone();
        pairs.extend(self.pairs.iter().map(|&(a, b)| (b, a)));
        Entourage { n_points: self.n_points, pairs }
    }

    pub fn with_diagonal(&self) -> Entourage {
        let mut pairs = self.pairs.clone();
        pairs.extend((0..self.n_points as u32).map(|i| (PointId(i), PointId(i))));
        Entourage { n_points: self.n_points, pairs }
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs.iter().all(|&(a, b)| self.pairs.contains(&(b, a)))
    }

    pub fn contains_diagonal(&self) -> bool {
        (0..self.n_points as u32).all(|i| self.pairs.contains(&(PointId(i), PointId(i))))
    }

    /// Restrict to pairs with both ends in `keep`, reindexing by `reindex`.
    pub fn restrict(&self, keep: &BTreeSet<PointId>, reindex: &BTreeMap<PointId, PointId>) -> Entourage {
        let pairs = self
            .pairs
            .iter()
            .filter(|(a, b)| keep.contains(a) && keep.contains(b))
            .map(|(a, b)| (reindex[a], reindex[b]))
            .collect();
        Entourage { n_points: keep.len(), pairs }
    }
}

/// `{x | ∃y ∈ a: (x,y) ∈ e}`. Contains `a` whenever `e` has the diagonal.
pub fn penumbra(e: &Entourage, a: &BTreeSet<PointId>) -> BTreeSet<PointId> {
    let mut out = BTreeSet::new();
    for (x, y) in e.iter() {
        if a.contains(&y) {
            out.insert(x);
        }
    }
    out
}

/// A monotone sequence `E_0 ⊆ E_1 ⊆ … ⊆ E_N` of symmetric entourages that
/// all contain the diagonal, with `E_0` the diagonal itself after
/// normalization. The presentation of a coarse structure at depth `N`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EntourageChain {
    levels: Vec<Entourage>,
}

impl EntourageChain {
    pub fn from_levels(levels: Vec<Entourage>) -> Result<Self> {
        if levels.is_empty() {
            return Err(CoarseError::BadScales);
        }
        let n = levels[0].n_points();
        for w in levels.windows(2) {
            if w[0].n_points() != n || w[1].n_points() != n {
                return Err(CoarseError::TableMismatch(w[0].n_points(), w[1].n_points()));
            }
        }
        Ok(EntourageChain { levels })
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> &Entourage {
        &self.levels[n.min(self.depth())]
    }

    pub fn levels(&self) -> &[Entourage] {
        &self.levels
    }

    pub fn top(&self) -> &Entourage {
        self.levels.last().unwrap()
    }

    pub fn n_points(&self) -> usize {
        self.levels[0].n_points()
    }

    /// Least level containing the pair, within depth.
    pub fn level_of_pair(&self, a: PointId, b: PointId) -> Option<usize> {
        self.levels.iter().position(|e| e.contains(a, b))
    }

    /// Least level containing the whole relation, within depth.
    pub fn level_containing(&self, e: &Entourage) -> Option<usize> {
        self.levels.iter().position(|lvl| e.is_subset(lvl))
    }

    pub fn is_normalized(&self) -> bool {
        self.levels[0] == Entourage::diagonal(self.n_points())
            && self.levels.iter().all(|e| e.is_symmetric() && e.contains_diagonal())
            && self.levels.windows(2).all(|w| w[0].is_subset(&w[1]))
    }

    pub fn restrict(&self, keep: &BTreeSet<PointId>) -> EntourageChain {
        let reindex: BTreeMap<PointId, PointId> = keep
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, PointId(new as u32)))
            .collect();
        EntourageChain {
            levels: self.levels.iter().map(|e| e.restrict(keep, &reindex)).collect(),
        }
    }
}

/// Normalize a generator list into a chain of depth `depth`.
///
/// Level `n` is the diagonal together with the symmetrized union of all
/// composition words of length at most `n` in the first `n` generators and
/// their inverses. Levels are monotone by construction and the result is
/// idempotent: normalizing the levels of a normalized chain reproduces it.
pub fn normalize_chain(generators: &[Entourage], depth: usize) -> Result<EntourageChain> {
    let n_points = generators.first().map_or(0, Entourage::n_points);
    for g in generators {
        if g.n_points() != n_points {
            return Err(CoarseError::TableMismatch(g.n_points(), n_points));
        }
    }
    let mut levels = Vec::with_capacity(depth + 1);
    levels.push(Entourage::diagonal(n_points));
    for n in 1..=depth {
        let take = n.min(generators.len());
        let mut alphabet: Vec<Entourage> = Vec::new();
        for g in &generators[..take] {
            alphabet.push(g.clone());
            alphabet.push(g.inverse());
        }
        let mut acc = Entourage::diagonal(n_points);
        // words of length <= n, deduplicated breadth first
        let mut frontier: Vec<Entourage> = alphabet.clone();
        let mut seen: BTreeSet<Vec<(PointId, PointId)>> = BTreeSet::new();
        for w in 1..=n {
            let mut next = Vec::new();
            for word in &frontier {
                acc = acc.union(word)?;
                if w < n {
                    for a in &alphabet {
                        let longer = word.compose(a)?;
                        if longer.is_empty() {
                            continue;
                        }
                        let key: Vec<(PointId, PointId)> = longer.iter().collect();
                        if seen.insert(key) {
                            next.push(longer);
                        }
                    }
                }
            }
            frontier = next;
            if frontier.is_empty() {
                break;
            }
        }
        levels.push(acc.symmetrize().with_diagonal());
    }
    // enforce monotonicity (generators joining at later levels only add pairs)
    for i in 1..levels.len() {
        let merged = levels[i].union(&levels[i - 1])?;
        levels[i] = merged;
    }
    EntourageChain::from_levels(levels)
}

/// How a finite presentation sits inside the space it models.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Ambient {
    /// The presentation is the whole space.
    Finite,
    /// A window of an infinite family; `family` names the regeneration rule.
    Window { family: String, radius: u32 },
}

/// A coarse space presented on a finite window.
#[derive(Clone, Debug)]
pub struct CoarseSpace {
    labels: Vec<String>,
    chain: EntourageChain,
    ambient: Ambient,
}

impl CoarseSpace {
    pub fn new(labels: Vec<String>, chain: EntourageChain, ambient: Ambient) -> Result<Self> {
        if labels.len() != chain.n_points() {
            return Err(CoarseError::TableMismatch(labels.len(), chain.n_points()));
        }
        Ok(CoarseSpace { labels, chain, ambient })
    }

    /// Metric presentation: level `n` relates points at distance ≤ `scales[n]`.
    /// `scales` must start at 0 and strictly increase, so `E_0` is the diagonal.
    pub fn from_metric(
        labels: Vec<String>,
        dist: &[Vec<f64>],
        scales: &[f64],
        ambient: Ambient,
    ) -> Result<Self> {
        let n = labels.len();
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(CoarseError::TableMismatch(dist.len(), n));
        }
        for i in 0..n {
            if dist[i][i] != 0.0 {
                return Err(CoarseError::NonzeroDiagonal(i));
            }
            for j in 0..n {
                if dist[i][j] != dist[j][i] {
                    return Err(CoarseError::AsymmetricMetric(i, j));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if dist[i][j] > dist[i][k] + dist[k][j] {
                        return Err(CoarseError::TriangleViolation(i, k, j));
                    }
                }
            }
        }
        if scales.is_empty() || scales[0] != 0.0 || scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoarseError::BadScales);
        }
        let mut levels = Vec::with_capacity(scales.len());
        for &s in scales {
            let mut pairs = BTreeSet::new();
            for i in 0..n {
                for j in 0..n {
                    if dist[i][j] <= s {
                        pairs.insert((PointId(i as u32), PointId(j as u32)));
                    }
                }
            }
            levels.push(Entourage { n_points: n, pairs });
        }
        CoarseSpace::new(labels, EntourageChain::from_levels(levels)?, ambient)
    }

    /// Integer interval with the absolute-value metric; labels are the values.
    pub fn integer_line(lo: i64, hi: i64, scales: &[f64], ambient: Ambient) -> Result<Self> {
        let labels: Vec<String> = (lo..=hi).map(|x| x.to_string()).collect();
        let dist: Vec<Vec<f64>> = (lo..=hi)
            .map(|x| (lo..=hi).map(|y| (x - y).abs() as f64).collect())
            .collect();
        CoarseSpace::from_metric(labels, &dist, scales, ambient)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> {
        (0..self.labels.len() as u32).map(PointId)
    }

    pub fn label(&self, p: PointId) -> &str {
        &self.labels[p.idx()]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of_label(&self, label: &str) -> Option<PointId> {
        self.labels.iter().position(|l| l == label).map(|i| PointId(i as u32))
    }

    pub fn chain(&self) -> &EntourageChain {
        &self.chain
    }

    pub fn depth(&self) -> usize {
        self.chain.depth()
    }

    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    pub fn all_points(&self) -> BTreeSet<PointId> {
        self.points().collect()
    }

    pub fn subset(&self, members: impl IntoIterator<Item = PointId>) -> Result<SubsetRef> {
        let members: BTreeSet<PointId> = members.into_iter().collect();
        for &p in &members {
            if p.idx() >= self.len() {
                return Err(CoarseError::PointOutOfRange(p.idx(), self.len()));
            }
        }
        Ok(SubsetRef { members })
    }

    pub fn subset_where(&self, pred: impl Fn(&str) -> bool) -> SubsetRef {
        SubsetRef {
            members: self.points().filter(|&p| pred(self.label(p))).collect(),
        }
    }

    /// Subspace with the restricted chain. Returns the new space and the map
    /// from its points back to the parent's.
    pub fn subspace(&self, subset: &SubsetRef) -> (CoarseSpace, Vec<PointId>) {
        let keep = &subset.members;
        let back: Vec<PointId> = keep.iter().copied().collect();
        let labels = back.iter().map(|&p| self.labels[p.idx()].clone()).collect();
        let chain = self.chain.restrict(keep);
        (
            CoarseSpace { labels, chain, ambient: self.ambient.clone() },
            back,
        )
    }

    /// Reachability in the top-level relation: every pair of points joined
    /// by some chain of top-level steps. Depth-relative, like everything
    /// else; a disconnected verdict may still connect at deeper levels.
    pub fn is_connected_within_depth(&self) -> bool {
        let n = self.len();
        if n <= 1 {
            return true;
        }
        let top = self.chain().top();
        let mut seen = vec![false; n];
        let mut stack = vec![PointId(0)];
        seen[0] = true;
        while let Some(p) = stack.pop() {
            for q in top.successors(p) {
                if !seen[q.idx()] {
                    seen[q.idx()] = true;
                    stack.push(q);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    /// Every presentation on a finite window has a locally finite coarsely
    /// dense subset, so this reports true; the field records its vacuity.
    pub fn bornologically_bounded_geometry(&self) -> BoundedGeometryReport {
        BoundedGeometryReport {
            holds: true,
            vacuous_on_window: matches!(self.ambient, Ambient::Window { .. }),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BoundedGeometryReport {
    pub holds: bool,
    pub vacuous_on_window: bool,
}

/// A subset of a space's points.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SubsetRef {
    pub members: BTreeSet<PointId>,
}

impl SubsetRef {
    pub fn empty() -> Self {
        SubsetRef { members: BTreeSet::new() }
    }
    pub fn len(&self) -> usize {
        self.members.len()
    }
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
    pub fn contains(&self, p: PointId) -> bool {
        self.members.contains(&p)
    }
    pub fn union(&self, other: &SubsetRef) -> SubsetRef {
        SubsetRef { members: self.members.union(&other.members).copied().collect() }
    }
    pub fn intersect(&self, other: &SubsetRef) -> SubsetRef {
        SubsetRef { members: self.members.intersection(&other.members).copied().collect() }
    }
    pub fn minus(&self, other: &SubsetRef) -> SubsetRef {
        SubsetRef { members: self.members.difference(&other.members).copied().collect() }
    }
}

/// Verdict of a boundedness query, always depth-relative.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Boundedness {
    /// Least level `n` such that the set fits in a single `E_n`-ball,
    /// together with a witnessing center.
    BoundedAt(usize, PointId),
    /// No level of the chain suffices; on a window this is inconclusive.
    UnknownWithinDepth,
}

impl Boundedness {
    pub fn is_bounded(&self) -> bool {
        matches!(self, Boundedness::BoundedAt(..))
    }
    pub fn level(&self) -> Option<usize> {
        match self {
            Boundedness::BoundedAt(n, _) => Some(*n),
            Boundedness::UnknownWithinDepth => None,
        }
    }
}

/// Least `n` with `K ⊆ Pen_{E_n}({y})` for some `y`. Empty `K` is bounded at 0.
pub fn is_bounded(space: &CoarseSpace, k: &SubsetRef) -> Boundedness {
    if k.is_empty() {
        return Boundedness::BoundedAt(0, PointId(0));
    }
    for n in 0..=space.depth() {
        let e = space.chain().level(n);
        for y in space.points() {
            let ball = penumbra(e, &BTreeSet::from([y]));
            if k.members.is_subset(&ball) {
                return Boundedness::BoundedAt(n, y);
            }
        }
    }
    Boundedness::UnknownWithinDepth
}

/// Product space: points are pairs, level `n` is `E_n ×̄ F_n`.
pub fn product(x: &CoarseSpace, y: &CoarseSpace, pair_cap: usize) -> Result<CoarseSpace> {
    let n = x.len().checked_mul(y.len()).ok_or_else(|| {
        CoarseError::CapExceeded("point count overflow in product".into())
    })?;
    if n > pair_cap {
        return Err(CoarseError::CapExceeded(format!(
            "product would have {n} points (cap {pair_cap})"
        )));
    }
    let mut labels = Vec::with_capacity(n);
    for a in x.points() {
        for b in y.points() {
            labels.push(format!("({},{})", x.label(a), y.label(b)));
        }
    }
    let idx = |a: PointId, b: PointId| PointId((a.0 * y.len() as u32) + b.0);
    let depth = x.depth().min(y.depth());
    let mut levels = Vec::with_capacity(depth + 1);
    for lvl in 0..=depth {
        let ex = x.chain().level(lvl);
        let fy = y.chain().level(lvl);
        let mut pairs = BTreeSet::new();
        for (a, a2) in ex.iter() {
            for (b, b2) in fy.iter() {
                pairs.insert((idx(a, b), idx(a2, b2)));
            }
        }
        levels.push(Entourage { n_points: n, pairs });
    }
    let ambient = match (x.ambient(), y.ambient()) {
        (Ambient::Finite, Ambient::Finite) => Ambient::Finite,
        (ax, ay) => {
            let fam = |a: &Ambient| match a {
                Ambient::Finite => "finite".to_string(),
                Ambient::Window { family, .. } => family.clone(),
            };
            let radius = match (ax, ay) {
                (Ambient::Window { radius, .. }, Ambient::Window { radius: r2, .. }) => *radius.max(r2),
                (Ambient::Window { radius, .. }, _) | (_, Ambient::Window { radius, .. }) => *radius,
                _ => 0,
            };
            Ambient::Window { family: format!("product({},{})", fam(ax), fam(ay)), radius }
        }
    };
    CoarseSpace::new(labels, EntourageChain::from_levels(levels)?, ambient)
}

pub const DEFAULT_PRODUCT_CAP: usize = 1 << 17;

/// Excisiveness verdict for a covering (or triad) `A, B` of `X`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Excisiveness {
    /// For each level `n`, the least `m` with
    /// `Pen_{E_n}(A) ∩ Pen_{E_n}(B) ⊆ Pen_{E_m}(A∩B)`.
    Witnessed(Vec<usize>),
    /// First level with no witness within depth.
    FailsAt(usize),
}

impl Excisiveness {
    pub fn is_witnessed(&self) -> bool {
        matches!(self, Excisiveness::Witnessed(_))
    }
}

/// Covering form of the excisiveness condition.
pub fn check_excisive(space: &CoarseSpace, a: &SubsetRef, b: &SubsetRef) -> Excisiveness {
    let cap = a.intersect(b);
    let mut witness = Vec::with_capacity(space.depth() + 1);
    for n in 0..=space.depth() {
        let e = space.chain().level(n);
        let lhs: BTreeSet<PointId> = penumbra(e, &a.members)
            .intersection(&penumbra(e, &b.members))
            .copied()
            .collect();
        let mut found = None;
        for m in 0..=space.depth() {
            let rhs = penumbra(space.chain().level(m), &cap.members);
            if lhs.is_subset(&rhs) {
                found = Some(m);
                break;
            }
        }
        match found {
            Some(m) => witness.push(m),
            None => return Excisiveness::FailsAt(n),
        }
    }
    Excisiveness::Witnessed(witness)
}

/// Subset form: for each `n` the least `m` with
/// `Pen_{E_n}(A) ∖ C ⊆ Pen_{E_m}(A ∖ C)`.
pub fn check_excisive_subset_form(space: &CoarseSpace, a: &SubsetRef, c: &SubsetRef) -> Excisiveness {
    let a_minus_c = a.minus(c);
    let mut witness = Vec::with_capacity(space.depth() + 1);
    for n in 0..=space.depth() {
        let e = space.chain().level(n);
        let lhs: BTreeSet<PointId> = penumbra(e, &a.members)
            .difference(&c.members)
            .copied()
            .collect();
        let mut found = None;
        for m in 0..=space.depth() {
            let rhs = penumbra(space.chain().level(m), &a_minus_c.members);
            if lhs.is_subset(&rhs) {
                found = Some(m);
                break;
            }
        }
        match found {
            Some(m) => witness.push(m),
            None => return Excisiveness::FailsAt(n),
        }
    }
    Excisiveness::Witnessed(witness)
}
