//! Maps between coarse spaces and group actions on them.
//!
//! A map is stored as one or more window stages (the same map presented at
//! growing radii); predicates that are vacuous on a single finite window,
//! like properness, are decided by stability across stages. Group actions are
//! lists of named injections of the point table; generators may be partial on
//! a window when the underlying bijection of the infinite space leaves it.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{CoarseError, Result};
use crate::space::{penumbra, Ambient, CoarseSpace, Entourage, PointId, SubsetRef};

/// One presentation of a map at a fixed window radius.
#[derive(Clone, Debug)]
pub struct MapStage {
    pub radius: u32,
    pub source: CoarseSpace,
    pub target: CoarseSpace,
    /// Total on the source window; the target may be a larger window.
    pub assignment: Vec<PointId>,
}

impl MapStage {
    pub fn apply(&self, p: PointId) -> PointId {
        self.assignment[p.idx()]
    }
}

/// A coarse map candidate: the base stage plus optional larger-radius stages.
#[derive(Clone, Debug)]
pub struct CoarseMap {
    stages: Vec<MapStage>,
}

impl CoarseMap {
    pub fn new(stages: Vec<MapStage>) -> Result<Self> {
        if stages.is_empty() {
            return Err(CoarseError::NotComposable("map needs at least one stage".into()));
        }
        for st in &stages {
            if st.assignment.len() != st.source.len() {
                return Err(CoarseError::NonTotalAssignment(st.assignment.len()));
            }
            for (i, img) in st.assignment.iter().enumerate() {
                if img.idx() >= st.target.len() {
                    return Err(CoarseError::PointOutOfRange(i, st.target.len()));
                }
            }
        }
        Ok(CoarseMap { stages })
    }

    pub fn single(source: CoarseSpace, target: CoarseSpace, assignment: Vec<PointId>) -> Result<Self> {
        CoarseMap::new(vec![MapStage { radius: 0, source, target, assignment }])
    }

    /// Build a stage tower from a label-level rule on window families.
    pub fn from_label_rule(
        windows: Vec<(u32, CoarseSpace, CoarseSpace)>,
        rule: impl Fn(&str) -> String,
    ) -> Result<Self> {
        let mut stages = Vec::new();
        for (radius, source, target) in windows {
            let mut assignment = Vec::with_capacity(source.len());
            for p in source.points() {
                let lbl = rule(source.label(p));
                let img = target
                    .index_of_label(&lbl)
                    .ok_or_else(|| CoarseError::NonTotalAssignment(p.idx()))?;
                assignment.push(img);
            }
            stages.push(MapStage { radius, source, target, assignment });
        }
        CoarseMap::new(stages)
    }

    pub fn base(&self) -> &MapStage {
        &self.stages[0]
    }

    pub fn stages(&self) -> &[MapStage] {
        &self.stages
    }

    pub fn apply(&self, p: PointId) -> PointId {
        self.base().apply(p)
    }

    /// `g ∘ self`, stage by stage.
    pub fn compose(&self, g: &CoarseMap) -> Result<CoarseMap> {
        let n = self.stages.len().min(g.stages.len());
        let mut stages = Vec::with_capacity(n);
        for (sf, sg) in self.stages.iter().zip(g.stages.iter()).take(n) {
            if sf.target.labels() != sg.source.labels() {
                return Err(CoarseError::NotComposable(
                    "target window of the first map differs from source of the second".into(),
                ));
            }
            let assignment = sf.assignment.iter().map(|&q| sg.apply(q)).collect();
            stages.push(MapStage {
                radius: sf.radius,
                source: sf.source.clone(),
                target: sg.target.clone(),
                assignment,
            });
        }
        CoarseMap::new(stages)
    }
}

/// Yes/no property with a witness or counterexample.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PropertyVerdict {
    Holds { witness: String },
    Fails { counterexample: String },
    Inconclusive { reason: String },
}

impl PropertyVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, PropertyVerdict::Holds { .. })
    }
}

/// Controlledness of one source level.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LevelWitness {
    /// Least target level containing the image of the source level.
    Level(usize),
    /// No target level suffices; carries an offending image pair.
    ExceedsDepth { pair: (PointId, PointId) },
}

#[derive(Clone, Debug)]
pub struct ControlledReport {
    pub per_level: Vec<LevelWitness>,
}

impl ControlledReport {
    pub fn within_depth(&self) -> bool {
        self.per_level.iter().all(|w| matches!(w, LevelWitness::Level(_)))
    }
    pub fn witness(&self, n: usize) -> Option<usize> {
        match self.per_level.get(n) {
            Some(LevelWitness::Level(m)) => Some(*m),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MapReport {
    pub controlled: ControlledReport,
    pub proper: PropertyVerdict,
    pub bornological: PropertyVerdict,
}

impl MapReport {
    pub fn is_coarse_within_depth(&self) -> bool {
        self.controlled.within_depth() && self.proper.holds()
    }
}

fn image_entourage(stage: &MapStage, e: &Entourage) -> Result<Entourage> {
    Entourage::from_pairs(
        stage.target.len(),
        e.iter().map(|(a, b)| (stage.apply(a), stage.apply(b))),
    )
}

fn controlled_report(stage: &MapStage) -> Result<ControlledReport> {
    let mut per_level = Vec::with_capacity(stage.source.depth() + 1);
    for n in 0..=stage.source.depth() {
        let img = image_entourage(stage, stage.source.chain().level(n))?;
        match stage.target.chain().level_containing(&img) {
            Some(m) => per_level.push(LevelWitness::Level(m)),
            None => {
                let top = stage.target.chain().top();
                let pair = img.iter().find(|&(a, b)| !top.contains(a, b)).unwrap();
                per_level.push(LevelWitness::ExceedsDepth { pair });
            }
        }
    }
    Ok(ControlledReport { per_level })
}

/// Controlled / proper / bornological verdicts for a map.
///
/// On `Finite` sources properness is trivially true; on windows the preimages
/// of fixed bounded sets must agree across at least two stages and stay
/// bounded within depth in the largest one.
pub fn check_map_properties(map: &CoarseMap) -> Result<MapReport> {
    let base = map.base();
    let controlled = controlled_report(base)?;

    let proper = if matches!(base.source.ambient(), Ambient::Finite) {
        PropertyVerdict::Holds { witness: "finite presentation, properness is vacuous".into() }
    } else if map.stages.len() < 2 {
        PropertyVerdict::Inconclusive { reason: "window map needs at least two stages".into() }
    } else {
        properness_across_stages(map)?
    };

    let bornological = bornological_verdict(base);

    Ok(MapReport { controlled, proper, bornological })
}

fn properness_across_stages(map: &CoarseMap) -> Result<PropertyVerdict> {
    let base = map.base();
    // only the two largest stages carry evidence: growth at smaller radii can
    // be a truncation artifact of the window boundary
    let prev_stage = &map.stages[map.stages.len() - 2];
    let last = map.stages.last().unwrap();
    // fixed bounded sets: top-level balls in the base target, held fixed as
    // label sets while the window grows
    for y in base.target.points() {
        let y_label = base.target.label(y).to_string();
        let ball_labels: BTreeSet<String> =
            penumbra(base.target.chain().top(), &BTreeSet::from([y]))
                .iter()
                .map(|&p| base.target.label(p).to_string())
                .collect();
        let preimage = |st: &MapStage| -> BTreeSet<String> {
            st.source
                .points()
                .filter(|&x| ball_labels.contains(st.target.label(st.apply(x))))
                .map(|x| st.source.label(x).to_string())
                .collect()
        };
        let pre_a = preimage(prev_stage);
        let pre_b = preimage(last);
        if pre_a != pre_b {
            return Ok(PropertyVerdict::Fails {
                counterexample: format!(
                    "preimage of the ball around {y_label} grows with the window: {} then {} points",
                    pre_a.len(),
                    pre_b.len()
                ),
            });
        }
        let members: BTreeSet<PointId> =
            pre_b.iter().filter_map(|l| last.source.index_of_label(l)).collect();
        let verdict = crate::space::is_bounded(&last.source, &SubsetRef { members });
        if !verdict.is_bounded() {
            return Ok(PropertyVerdict::Inconclusive {
                reason: format!("preimage of the ball around {y_label} not bounded within depth"),
            });
        }
    }
    Ok(PropertyVerdict::Holds {
        witness: format!(
            "preimages of all base balls stable between radii {} and {}",
            prev_stage.radius, last.radius
        ),
    })
}

fn bornological_verdict(stage: &MapStage) -> PropertyVerdict {
    for x in stage.source.points() {
        let ball = penumbra(stage.source.chain().top(), &BTreeSet::from([x]));
        let image: BTreeSet<PointId> = ball.iter().map(|&p| stage.apply(p)).collect();
        let verdict = crate::space::is_bounded(&stage.target, &SubsetRef { members: image });
        if !verdict.is_bounded() {
            return PropertyVerdict::Inconclusive {
                reason: format!(
                    "image of the ball around {} not bounded within depth",
                    stage.source.label(x)
                ),
            };
        }
    }
    PropertyVerdict::Holds { witness: "all top-level balls map into bounded sets".into() }
}

/// Closeness verdict for two maps with the same source and target.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Closeness {
    CloseAt(usize),
    NotCloseWithinDepth,
}

impl Closeness {
    pub fn level(&self) -> Option<usize> {
        match self {
            Closeness::CloseAt(n) => Some(*n),
            Closeness::NotCloseWithinDepth => None,
        }
    }
}

/// Least target level containing all pairs `(f(x), g(x))`, over every stage.
pub fn are_close(f: &CoarseMap, g: &CoarseMap) -> Result<Closeness> {
    let n = f.stages.len().min(g.stages.len());
    let mut worst = 0;
    for (sf, sg) in f.stages.iter().zip(g.stages.iter()).take(n) {
        if sf.source.labels() != sg.source.labels() || sf.target.labels() != sg.target.labels() {
            return Err(CoarseError::NotComposable("closeness needs equal windows".into()));
        }
        let graph_diff = Entourage::from_pairs(
            sf.target.len(),
            sf.source.points().map(|x| (sf.apply(x), sg.apply(x))),
        )?;
        match sf.target.chain().level_containing(&graph_diff) {
            Some(m) => worst = worst.max(m),
            None => return Ok(Closeness::NotCloseWithinDepth),
        }
    }
    Ok(Closeness::CloseAt(worst))
}

#[derive(Debug)]
pub struct EquivalenceReport {
    pub forward: MapReport,
    pub backward: MapReport,
    pub backward_then_forward_close: Closeness,
    pub forward_then_backward_close: Closeness,
}

impl EquivalenceReport {
    pub fn is_equivalence(&self) -> bool {
        self.forward.is_coarse_within_depth()
            && self.backward.is_coarse_within_depth()
            && self.backward_then_forward_close.level().is_some()
            && self.forward_then_backward_close.level().is_some()
    }
}

/// Certify `f: X → Y`, `g: Y → X` as a coarse equivalence pair.
pub fn verify_equivalence(f: &CoarseMap, g: &CoarseMap) -> Result<EquivalenceReport> {
    let forward = check_map_properties(f)?;
    let backward = check_map_properties(g)?;
    let gf = f.compose(g)?; // X -> X
    let fg = g.compose(f)?; // Y -> Y
    let id_x = identity_like(&gf)?;
    let id_y = identity_like(&fg)?;
    Ok(EquivalenceReport {
        forward,
        backward,
        backward_then_forward_close: are_close(&gf, &id_x)?,
        forward_then_backward_close: are_close(&fg, &id_y)?,
    })
}

/// Identity on the source window of `m`, embedded into `m`'s target by label.
fn identity_like(m: &CoarseMap) -> Result<CoarseMap> {
    let mut stages = Vec::new();
    for st in m.stages() {
        let mut assignment = Vec::with_capacity(st.source.len());
        for p in st.source.points() {
            let img = st
                .target
                .index_of_label(st.source.label(p))
                .ok_or_else(|| CoarseError::NotComposable("identity does not embed".into()))?;
            assignment.push(img);
        }
        stages.push(MapStage {
            radius: st.radius,
            source: st.source.clone(),
            target: st.target.clone(),
            assignment,
        });
    }
    CoarseMap::new(stages)
}

// ---------------------------------------------------------------------------
// group actions

/// Signed permutation of a coefficient basis: entry `k ↦ (perm, sign)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SignedPerm {
    pub images: Vec<(usize, i8)>,
}

impl SignedPerm {
    pub fn identity(rank: usize) -> Self {
        SignedPerm { images: (0..rank).map(|k| (k, 1)).collect() }
    }
    pub fn is_valid(&self) -> bool {
        let mut seen = vec![false; self.images.len()];
        for &(img, sign) in &self.images {
            if img >= self.images.len() || (sign != 1 && sign != -1) || seen[img] {
                return false;
            }
            seen[img] = true;
        }
        true
    }
}

/// One generator: an injection of the window, partial where the underlying
/// bijection of the ambient space leaves it.
#[derive(Clone, Debug)]
pub struct ActionGenerator {
    pub name: String,
    pub forward: Vec<Option<PointId>>,
    pub backward: Vec<Option<PointId>>,
}

impl ActionGenerator {
    pub fn new(name: impl Into<String>, n_points: usize, forward: Vec<Option<PointId>>) -> Result<Self> {
        let name = name.into();
        if forward.len() != n_points {
            return Err(CoarseError::NotBijective(name));
        }
        let mut backward = vec![None; n_points];
        for (i, img) in forward.iter().enumerate() {
            if let Some(q) = img {
                if q.idx() >= n_points {
                    return Err(CoarseError::PointOutOfRange(q.idx(), n_points));
                }
                if backward[q.idx()].is_some() {
                    return Err(CoarseError::NotBijective(name));
                }
                backward[q.idx()] = Some(PointId(i as u32));
            }
        }
        Ok(ActionGenerator { name, forward, backward })
    }

    pub fn is_total_bijection(&self) -> bool {
        self.forward.iter().all(Option::is_some)
    }
}

/// A relation declared by the caller, e.g. an involution `r·r = 1`.
/// Letters are `(generator index, inverted)`.
#[derive(Clone, Debug)]
pub struct Relation {
    pub name: String,
    pub word: Vec<(usize, bool)>,
}

/// A group acting on a window by (partial) injections, with an optional
/// signed-permutation action on a coefficient basis.
#[derive(Clone, Debug)]
pub struct GroupAction {
    pub generators: Vec<ActionGenerator>,
    pub relations: Vec<Relation>,
    pub coefficient_action: BTreeMap<String, SignedPerm>,
    n_points: usize,
}

/// A group element presented as a word, with its (partial) action.
#[derive(Clone, Debug)]
pub struct Element {
    pub word: Vec<(usize, bool)>,
    pub forward: Vec<Option<PointId>>,
}

impl Element {
    pub fn apply(&self, p: PointId) -> Option<PointId> {
        self.forward[p.idx()]
    }
}

impl GroupAction {
    pub fn new(
        n_points: usize,
        generators: Vec<ActionGenerator>,
        relations: Vec<Relation>,
        coefficient_action: BTreeMap<String, SignedPerm>,
    ) -> Result<Self> {
        for g in &generators {
            if g.forward.len() != n_points {
                return Err(CoarseError::NotBijective(g.name.clone()));
            }
        }
        for sp in coefficient_action.values() {
            if !sp.is_valid() {
                return Err(CoarseError::BadCoefficientAction("signed permutation".into()));
            }
        }
        let action = GroupAction { generators, relations, coefficient_action, n_points };
        action.verify_relations()?;
        Ok(action)
    }

    pub fn trivial(n_points: usize) -> Self {
        GroupAction {
            generators: Vec::new(),
            relations: Vec::new(),
            coefficient_action: BTreeMap::new(),
            n_points,
        }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn is_total(&self) -> bool {
        self.generators.iter().all(ActionGenerator::is_total_bijection)
    }

    fn letter_image(&self, p: PointId, letter: (usize, bool)) -> Option<PointId> {
        let g = &self.generators[letter.0];
        if letter.1 {
            g.backward[p.idx()]
        } else {
            g.forward[p.idx()]
        }
    }

    fn verify_relations(&self) -> Result<()> {
        for rel in &self.relations {
            for i in 0..self.n_points {
                let mut p = Some(PointId(i as u32));
                for &letter in &rel.word {
                    p = p.and_then(|q| self.letter_image(q, letter));
                }
                // a relation only binds where the whole word stays in the window
                if let Some(q) = p {
                    if q != PointId(i as u32) {
                        return Err(CoarseError::RelationFails(rel.name.clone()));
                    }
                }
            }
        }
        Ok(())
    }

    fn identity_element(&self) -> Element {
        Element {
            word: Vec::new(),
            forward: (0..self.n_points as u32).map(|i| Some(PointId(i))).collect(),
        }
    }

    /// Distinct elements by word length, deduplicated by their action on the
    /// window. The boolean reports whether the enumeration closed before the
    /// cap, i.e. the image group on the window was exhausted.
    pub fn enumerate_elements(&self, word_cap: usize) -> (Vec<Element>, bool) {
        let mut seen: BTreeSet<Vec<Option<PointId>>> = BTreeSet::new();
        let id = self.identity_element();
        seen.insert(id.forward.clone());
        let mut out = vec![id];
        let mut frontier: Vec<Element> = vec![out[0].clone()];
        let mut closed = self.generators.is_empty();
        for _len in 1..=word_cap {
            let mut next = Vec::new();
            for el in &frontier {
                for gi in 0..self.generators.len() {
                    for inv in [false, true] {
                        let forward: Vec<Option<PointId>> = (0..self.n_points)
                            .map(|i| el.forward[i].and_then(|q| self.letter_image(q, (gi, inv))))
                            .collect();
                        if seen.insert(forward.clone()) {
                            let mut word = el.word.clone();
                            word.push((gi, inv));
                            next.push(Element { word, forward });
                        }
                    }
                }
            }
            if next.is_empty() {
                closed = true;
                break;
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        (out, closed)
    }

    /// Orbit of a point under the enumerated elements.
    pub fn orbit(&self, p: PointId, elements: &[Element]) -> BTreeSet<PointId> {
        let mut orb = BTreeSet::new();
        for el in elements {
            if let Some(q) = el.apply(p) {
                orb.insert(q);
            }
        }
        orb
    }
}

/// Isocoarseness verdict per chain level.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Isocoarseness {
    /// For each level `n` the least `m` containing the element-orbit of `E_n`.
    Witnessed(Vec<usize>),
    FailsAt { level: usize, pair: (PointId, PointId), word: Vec<(usize, bool)> },
    Inconclusive { reason: String },
}

impl Isocoarseness {
    pub fn is_witnessed(&self) -> bool {
        matches!(self, Isocoarseness::Witnessed(_))
    }
}

#[derive(Debug)]
pub struct ActionReport {
    pub total_bijections: bool,
    pub proper: PropertyVerdict,
    pub isocoarse: Isocoarseness,
    pub enumeration_closed: bool,
}

impl ActionReport {
    pub fn passes_equivariant_gate(&self) -> bool {
        self.total_bijections && self.proper.holds() && self.isocoarse.is_witnessed()
    }
}

pub const DEFAULT_WORD_CAP: usize = 8;

/// Properness and isocoarseness of an action, within depth and word cap.
pub fn check_action(action: &GroupAction, space: &CoarseSpace, word_cap: usize) -> Result<ActionReport> {
    if action.n_points() != space.len() {
        return Err(CoarseError::TableMismatch(action.n_points(), space.len()));
    }
    let (elements, closed) = action.enumerate_elements(word_cap);

    // proper: elements returning a bounded set to itself must stop appearing
    // as the word length grows, unless the enumeration already closed
    let proper = if closed {
        PropertyVerdict::Holds { witness: "group image on the window is finite".into() }
    } else {
        let max_len = elements.iter().map(|el| el.word.len()).max().unwrap_or(0);
        let mut max_intersecting_len = 0usize;
        for x in space.points() {
            let ball = penumbra(space.chain().top(), &BTreeSet::from([x]));
            for el in &elements {
                if el.word.len() > max_intersecting_len
                    && ball.iter().any(|&k| el.apply(k).map_or(false, |q| ball.contains(&q)))
                {
                    max_intersecting_len = el.word.len();
                }
            }
        }
        if max_intersecting_len + 2 <= max_len {
            PropertyVerdict::Holds {
                witness: format!(
                    "no element of word length above {max_intersecting_len} returns a ball to itself (cap {max_len})"
                ),
            }
        } else {
            PropertyVerdict::Inconclusive {
                reason: format!(
                    "elements of word length {max_intersecting_len} still return balls to themselves at cap {max_len}"
                ),
            }
        }
    };

    // isocoarse: the element-orbit of each level must stay within some level
    let mut witness = Vec::with_capacity(space.depth() + 1);
    let mut verdict = None;
    'levels: for n in 0..=space.depth() {
        let e = space.chain().level(n);
        let mut m_needed = 0usize;
        for el in &elements {
            for (a, b) in e.iter() {
                let (Some(a2), Some(b2)) = (el.apply(a), el.apply(b)) else { continue };
                match space.chain().level_of_pair(a2, b2) {
                    Some(m) => m_needed = m_needed.max(m),
                    None => {
                        verdict = Some(Isocoarseness::FailsAt {
                            level: n,
                            pair: (a, b),
                            word: el.word.clone(),
                        });
                        break 'levels;
                    }
                }
            }
        }
        witness.push(m_needed);
    }
    let isocoarse = verdict.unwrap_or(Isocoarseness::Witnessed(witness));

    Ok(ActionReport {
        total_bijections: action.is_total(),
        proper,
        isocoarse,
        enumeration_closed: closed,
    })
}

// ---------------------------------------------------------------------------
// discretization

/// Greedy tie-break order; two seeds give two deterministic discretizations.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GreedySeed {
    Ascending,
    Descending,
}

#[derive(Debug)]
pub struct Discretization {
    pub chosen: SubsetRef,
    /// `π`: every point to its representative (identity on the subset).
    pub projection: Vec<PointId>,
    /// `E_sep ∩ (X'×X') ⊆ Diag` held strictly.
    pub separated: bool,
    /// Every point lies in the `E∘E`-penumbra of the subset.
    pub dense: bool,
    /// Least chain level containing every `(x, π(x))`.
    pub closeness: Option<usize>,
    /// Orbits were added beyond the plain greedy pass.
    pub enlarged: bool,
    /// `π(xγ) = π(x)γ` for every element and the subset is orbit-closed
    /// (true when no action was given).
    pub equivariant: bool,
}

/// Greedy maximal separated subset with its projection.
///
/// Without an action: points in seed order, kept when separated from all
/// previous picks. With an action: orbit-wise greedy, orbits ordered by chain
/// distance from the base orbit; requires the equivariant gate. Orbits that
/// cannot keep strict separation are skipped and only re-added (whole) when
/// density or an equivariant projection needs them; the flags record this.
pub fn discretize(
    space: &CoarseSpace,
    sep_level: usize,
    action: Option<&GroupAction>,
    seed: GreedySeed,
) -> Result<Discretization> {
    let e = space.chain().level(sep_level);
    let e2 = e.compose(e)?;
    match action {
        None => {
            let order: Vec<PointId> = match seed {
                GreedySeed::Ascending => space.points().collect(),
                GreedySeed::Descending => {
                    let mut v: Vec<PointId> = space.points().collect();
                    v.reverse();
                    v
                }
            };
            let mut chosen: BTreeSet<PointId> = BTreeSet::new();
            for x in order {
                if chosen.iter().all(|&y| x == y || !e.contains(x, y)) {
                    chosen.insert(x);
                }
            }
            let projection = project_to(space, &chosen, &e2)?;
            finish_discretization(space, e, &e2, chosen, projection, false, None)
        }
        Some(action) => {
            let report = check_action(action, space, DEFAULT_WORD_CAP)?;
            if !report.total_bijections {
                return Err(CoarseError::NotBijective("window-partial generator".into()));
            }
            match &report.isocoarse {
                Isocoarseness::Witnessed(_) => {}
                Isocoarseness::FailsAt { level, .. } => {
                    return Err(CoarseError::NotIsocoarse(*level))
                }
                Isocoarseness::Inconclusive { .. } => {
                    return Err(CoarseError::NotIsocoarse(sep_level))
                }
            }
            if !report.proper.holds() {
                return Err(CoarseError::NotProper);
            }
            let (elements, _) = action.enumerate_elements(DEFAULT_WORD_CAP);

            // orbits keyed by least member
            let mut orbit_of: BTreeMap<PointId, BTreeSet<PointId>> = BTreeMap::new();
            let mut seen: BTreeSet<PointId> = BTreeSet::new();
            for p in space.points() {
                if seen.contains(&p) {
                    continue;
                }
                let orb = action.orbit(p, &elements);
                seen.extend(orb.iter().copied());
                orbit_of.insert(*orb.iter().next().unwrap(), orb);
            }
            let base_key = match seed {
                GreedySeed::Ascending => *orbit_of.keys().next().unwrap(),
                GreedySeed::Descending => *orbit_of.keys().last().unwrap(),
            };
            let base = orbit_of[&base_key].clone();
            let mut keys: Vec<PointId> = orbit_of.keys().copied().collect();
            let orbit_distance = |orb: &BTreeSet<PointId>| -> usize {
                let mut best = usize::MAX;
                for &a in orb {
                    for &b in &base {
                        if let Some(l) = space.chain().level_of_pair(a, b) {
                            best = best.min(l);
                        }
                    }
                }
                best
            };
            keys.sort_by_key(|k| (orbit_distance(&orbit_of[k]), *k));

            let mut chosen: BTreeSet<PointId> = BTreeSet::new();
            for k in keys {
                let orb = &orbit_of[&k];
                let internally_ok =
                    orb.iter().all(|&a| orb.iter().all(|&b| a == b || !e.contains(a, b)));
                let against_ok =
                    orb.iter().all(|&a| chosen.iter().all(|&b| !e.contains(a, b)));
                if internally_ok && against_ok {
                    chosen.extend(orb.iter().copied());
                }
            }
            // density repair: an uncovered point pulls in its whole orbit
            let mut enlarged = false;
            loop {
                let covered = penumbra(&e2, &chosen);
                let Some(x) = space.points().find(|p| !covered.contains(p)) else { break };
                let orb = action.orbit(x, &elements);
                chosen.extend(orb.iter().copied());
                enlarged = true;
            }

            // equivariant projection: choose on orbit representatives, propagate
            let mut projection: Vec<Option<PointId>> = vec![None; space.len()];
            let mut rep_seen: BTreeSet<PointId> = BTreeSet::new();
            for rep in space.points() {
                if rep_seen.contains(&rep) {
                    continue;
                }
                let orb = action.orbit(rep, &elements);
                rep_seen.extend(orb.iter().copied());
                let stab_rep: Vec<&Element> =
                    elements.iter().filter(|el| el.apply(rep) == Some(rep)).collect();
                let target = if chosen.contains(&rep) {
                    rep
                } else {
                    let mut best: Option<(usize, PointId)> = None;
                    for &y in &chosen {
                        if !e2.contains(rep, y) {
                            continue;
                        }
                        // the stabilizer of the point must fix its image
                        if !stab_rep.iter().all(|el| el.apply(y) == Some(y)) {
                            continue;
                        }
                        let lvl = space.chain().level_of_pair(rep, y).unwrap_or(usize::MAX);
                        if best.map_or(true, |(bl, by)| (lvl, y) < (bl, by)) {
                            best = Some((lvl, y));
                        }
                    }
                    match best {
                        Some((_, y)) => y,
                        None => {
                            // stabilizer enlargement: adopt the point's own orbit
                            chosen.extend(orb.iter().copied());
                            enlarged = true;
                            rep
                        }
                    }
                };
                for el in elements.iter() {
                    if let Some(q) = el.apply(rep) {
                        let img = el.apply(target).expect("total action");
                        if let Some(prev) = projection[q.idx()] {
                            debug_assert_eq!(prev, img, "projection ill-defined on orbit");
                        }
                        projection[q.idx()] = Some(img);
                    }
                }
            }
            let projection: Vec<PointId> = projection
                .into_iter()
                .enumerate()
                .map(|(i, p)| p.ok_or(CoarseError::NonTotalAssignment(i)))
                .collect::<Result<_>>()?;
            finish_discretization(space, e, &e2, chosen, projection, enlarged, Some(action))
        }
    }
}

fn project_to(
    space: &CoarseSpace,
    chosen: &BTreeSet<PointId>,
    e2: &Entourage,
) -> Result<Vec<PointId>> {
    let mut projection = Vec::with_capacity(space.len());
    for x in space.points() {
        if chosen.contains(&x) {
            projection.push(x);
            continue;
        }
        let mut best: Option<(usize, PointId)> = None;
        for &y in chosen {
            if !e2.contains(x, y) {
                continue;
            }
            let lvl = space.chain().level_of_pair(x, y).unwrap_or(usize::MAX);
            if best.map_or(true, |(bl, by)| (lvl, y) < (bl, by)) {
                best = Some((lvl, y));
            }
        }
        match best {
            Some((_, y)) => projection.push(y),
            None => return Err(CoarseError::NonTotalAssignment(x.idx())),
        }
    }
    Ok(projection)
}

fn finish_discretization(
    space: &CoarseSpace,
    e: &Entourage,
    e2: &Entourage,
    chosen: BTreeSet<PointId>,
    projection: Vec<PointId>,
    enlarged: bool,
    action: Option<&GroupAction>,
) -> Result<Discretization> {
    let separated = chosen
        .iter()
        .all(|&a| chosen.iter().all(|&b| a == b || !e.contains(a, b)));
    let covered = penumbra(e2, &chosen);
    let dense = space.points().all(|p| covered.contains(&p));
    let graph = Entourage::from_pairs(
        space.len(),
        space.points().map(|x| (x, projection[x.idx()])),
    )?;
    let closeness = space.chain().level_containing(&graph);
    let equivariant = match action {
        None => true,
        Some(action) => {
            let (elements, _) = action.enumerate_elements(DEFAULT_WORD_CAP);
            space.points().all(|x| {
                elements.iter().all(|el| match el.apply(x) {
                    Some(xg) => el.apply(projection[x.idx()]) == Some(projection[xg.idx()]),
                    None => true,
                })
            }) && chosen.iter().all(|&x| {
                elements
                    .iter()
                    .all(|el| el.apply(x).map_or(true, |xg| chosen.contains(&xg)))
            })
        }
    };
    Ok(Discretization {
        chosen: SubsetRef { members: chosen },
        projection,
        separated,
        dense,
        closeness,
        enlarged,
        equivariant,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::space::tests::line;

    pub fn line_window(radius: i64, scales: &[f64]) -> CoarseSpace {
        let labels: Vec<String> = (-radius..=radius).map(|x| x.to_string()).collect();
        let dist: Vec<Vec<f64>> = (-radius..=radius)
            .map(|x| (-radius..=radius).map(|y| (x - y).abs() as f64).collect())
            .collect();
        CoarseSpace::from_metric(
            labels,
            &dist,
            scales,
            Ambient::Window { family: "z".into(), radius: radius as u32 },
        )
        .unwrap()
    }

    fn shift_map_pad(amount: i64, radii: &[i64], pad: i64) -> CoarseMap {
        let scales = [0.0, 1.0, 2.0, 3.0];
        let windows = radii
            .iter()
            .map(|&r| (r as u32, line_window(r, &scales), line_window(r + pad, &scales)))
            .collect();
        CoarseMap::from_label_rule(windows, |l| (l.parse::<i64>().unwrap() + amount).to_string())
            .unwrap()
    }

    fn shift_map(amount: i64, radii: &[i64]) -> CoarseMap {
        shift_map_pad(amount, radii, amount.abs())
    }

    fn id_map(radii: &[i64], pad: i64) -> CoarseMap {
        let scales = [0.0, 1.0, 2.0, 3.0];
        let windows = radii
            .iter()
            .map(|&r| (r as u32, line_window(r, &scales), line_window(r + pad, &scales)))
            .collect();
        CoarseMap::from_label_rule(windows, |l| l.to_string()).unwrap()
    }

    #[test]
    fn shift_is_an_isometry() {
        let f = shift_map(1, &[6, 9, 12]);
        let report = check_map_properties(&f).unwrap();
        // distances are preserved, so each level maps into itself
        for n in 0..=3 {
            assert_eq!(report.controlled.witness(n), Some(n));
        }
        assert!(report.proper.holds());
        assert!(report.bornological.holds());
        assert!(report.is_coarse_within_depth());
    }

    #[test]
    fn constant_map_is_controlled_but_not_proper() {
        let scales = [0.0, 1.0, 2.0, 3.0];
        let windows = vec![
            (6, line_window(6, &scales), line_window(6, &scales)),
            (9, line_window(9, &scales), line_window(9, &scales)),
            (12, line_window(12, &scales), line_window(12, &scales)),
        ];
        let f = CoarseMap::from_label_rule(windows, |_| "0".to_string()).unwrap();
        let report = check_map_properties(&f).unwrap();
        assert_eq!(report.controlled.witness(3), Some(0));
        assert!(matches!(report.proper, PropertyVerdict::Fails { .. }));
    }

    #[test]
    fn doubling_reports_unknown_beyond_depth() {
        let scales = [0.0, 1.0, 2.0, 3.0];
        let src = line(-8, 8, &scales);
        let tgt = line(-16, 16, &scales);
        let assignment: Vec<PointId> = src
            .points()
            .map(|p| {
                let v: i64 = src.label(p).parse().unwrap();
                tgt.index_of_label(&(2 * v).to_string()).unwrap()
            })
            .collect();
        let f = CoarseMap::single(src, tgt, assignment).unwrap();
        let report = check_map_properties(&f).unwrap();
        assert_eq!(report.controlled.witness(1), Some(2));
        assert!(matches!(report.controlled.per_level[2], LevelWitness::ExceedsDepth { .. }));
        assert!(!report.controlled.within_depth());
    }

    #[test]
    fn composite_of_coarse_maps_is_coarse_with_chained_witnesses() {
        // stage growth must outrun the composite's preimage reach near the
        // window edge, hence the wider spacing
        let f = shift_map(1, &[6, 10, 14]);
        let scales = [0.0, 1.0, 2.0, 3.0];
        let g_windows: Vec<(u32, CoarseSpace, CoarseSpace)> = [7i64, 11, 15]
            .iter()
            .map(|&r| (r as u32, line_window(r, &scales), line_window(r + 1, &scales)))
            .collect();
        let g = CoarseMap::from_label_rule(g_windows, |l| {
            (l.parse::<i64>().unwrap() + 1).to_string()
        })
        .unwrap();
        let gf = f.compose(&g).unwrap();
        let rf = check_map_properties(&f).unwrap();
        let rg = check_map_properties(&g).unwrap();
        let rgf = check_map_properties(&gf).unwrap();
        assert!(rgf.is_coarse_within_depth());
        // witnesses chain: m_gf(n) <= m_g(m_f(n)) wherever defined
        for n in 0..=3 {
            let chained = rf.controlled.witness(n).and_then(|m| rg.controlled.witness(m));
            if let (Some(direct), Some(chained)) = (rgf.controlled.witness(n), chained) {
                assert!(direct <= chained, "witnesses fail to chain at level {n}");
            }
        }
    }

    #[test]
    fn closeness_of_identity_and_shift() {
        let f = id_map(&[6, 9], 1);
        let g = shift_map(1, &[6, 9]);
        assert_eq!(are_close(&f, &g).unwrap(), Closeness::CloseAt(1));
        assert_eq!(are_close(&f, &f).unwrap(), Closeness::CloseAt(0));
    }

    #[test]
    fn reflection_is_not_close_to_identity() {
        let scales = [0.0, 1.0, 2.0, 3.0];
        let windows: Vec<(u32, CoarseSpace, CoarseSpace)> = [6i64, 9]
            .iter()
            .map(|&r| (r as u32, line_window(r, &scales), line_window(r, &scales)))
            .collect();
        let neg =
            CoarseMap::from_label_rule(windows.clone(), |l| (-l.parse::<i64>().unwrap()).to_string())
                .unwrap();
        let id = CoarseMap::from_label_rule(windows, |l| l.to_string()).unwrap();
        assert_eq!(are_close(&id, &neg).unwrap(), Closeness::NotCloseWithinDepth);
    }

    #[test]
    fn closeness_composes_through_levels() {
        let f = id_map(&[6], 3);
        let g = shift_map_pad(1, &[6], 3);
        let h = shift_map_pad(3, &[6], 3);
        let n = are_close(&f, &g).unwrap().level().unwrap();
        let m = are_close(&g, &h).unwrap().level().unwrap();
        let k = are_close(&f, &h).unwrap().level().unwrap();
        // E_n ∘ E_m covers the composite gap
        assert!(k <= n + m);
    }

    #[test]
    fn even_inclusion_is_an_equivalence() {
        let scales: Vec<f64> = (0..=8).map(f64::from).collect();
        let full = line(-10, 10, &scales);
        let evens = full.subset_where(|l| l.parse::<i64>().unwrap() % 2 == 0);
        let (sub, back) = full.subspace(&evens);
        let f = CoarseMap::single(sub.clone(), full.clone(), back).unwrap();
        let round: Vec<PointId> = full
            .points()
            .map(|p| {
                let v: i64 = full.label(p).parse().unwrap();
                let even = if v.rem_euclid(2) == 0 { v } else { v - 1 };
                sub.index_of_label(&even.to_string()).unwrap()
            })
            .collect();
        let g = CoarseMap::single(full, sub, round).unwrap();
        let report = verify_equivalence(&f, &g).unwrap();
        assert!(report.is_equivalence());
        assert_eq!(report.forward_then_backward_close.level(), Some(1));
    }

    #[test]
    fn identity_equivalence_is_level_zero() {
        let scales = [0.0, 1.0];
        let s = line(0, 5, &scales);
        let ids: Vec<PointId> = s.points().collect();
        let f = CoarseMap::single(s.clone(), s.clone(), ids.clone()).unwrap();
        let g = CoarseMap::single(s.clone(), s, ids).unwrap();
        let report = verify_equivalence(&f, &g).unwrap();
        assert!(report.is_equivalence());
        assert_eq!(report.backward_then_forward_close.level(), Some(0));
        assert_eq!(report.forward_then_backward_close.level(), Some(0));
    }

    pub fn reflection_action(space: &CoarseSpace) -> GroupAction {
        let forward: Vec<Option<PointId>> = space
            .points()
            .map(|p| {
                let v: i64 = space.label(p).parse().unwrap();
                space.index_of_label(&(-v).to_string())
            })
            .collect();
        let gen = ActionGenerator::new("r", space.len(), forward).unwrap();
        GroupAction::new(
            space.len(),
            vec![gen],
            vec![Relation { name: "r^2".into(), word: vec![(0, false), (0, false)] }],
            BTreeMap::new(),
        )
        .unwrap()
    }

    #[test]
    fn reflection_action_is_proper_and_isocoarse() {
        let s = line(-6, 6, &[0.0, 1.0, 2.0, 3.0]);
        let action = reflection_action(&s);
        let report = check_action(&action, &s, DEFAULT_WORD_CAP).unwrap();
        assert!(report.total_bijections);
        assert!(report.enumeration_closed, "Z/2 closes after one step");
        assert!(report.proper.holds());
        match &report.isocoarse {
            Isocoarseness::Witnessed(w) => {
                // levels are reflection invariant
                for (n, m) in w.iter().enumerate() {
                    assert_eq!(*m, n);
                }
            }
            other => panic!("expected witness, got {other:?}"),
        }
        assert!(report.passes_equivariant_gate());
    }

    #[test]
    fn trivial_action_passes() {
        let s = line(0, 5, &[0.0, 1.0]);
        let action = GroupAction::trivial(s.len());
        let report = check_action(&action, &s, DEFAULT_WORD_CAP).unwrap();
        assert!(report.passes_equivariant_gate());
        match &report.isocoarse {
            Isocoarseness::Witnessed(w) => assert!(w.iter().enumerate().all(|(n, m)| *m == n)),
            other => panic!("unexpected {other:?}"),
        }
    }

    pub fn parse_pair(lbl: &str) -> (i64, i64) {
        let inner = lbl.trim_start_matches('(').trim_end_matches(')');
        let mut it = inner.splitn(2, ',');
        (it.next().unwrap().parse().unwrap(), it.next().unwrap().parse().unwrap())
    }

    /// `(x,y) ↦ (x+1, 2y)` on a lattice window: proper but not isocoarse.
    pub fn shear_action(space: &CoarseSpace) -> GroupAction {
        let forward: Vec<Option<PointId>> = space
            .points()
            .map(|p| {
                let (x, y) = parse_pair(space.label(p));
                space.index_of_label(&format!("({},{})", x + 1, 2 * y))
            })
            .collect();
        let gen = ActionGenerator::new("s", space.len(), forward).unwrap();
        GroupAction::new(space.len(), vec![gen], vec![], BTreeMap::new()).unwrap()
    }

    pub fn lattice(radius: i64, scales: &[f64]) -> CoarseSpace {
        let mut labels = Vec::new();
        let mut coords = Vec::new();
        for x in -radius..=radius {
            for y in -radius..=radius {
                labels.push(format!("({x},{y})"));
                coords.push((x, y));
            }
        }
        let dist: Vec<Vec<f64>> = coords
            .iter()
            .map(|&(x1, y1)| {
                coords
                    .iter()
                    .map(|&(x2, y2)| ((x1 - x2).abs().max((y1 - y2).abs())) as f64)
                    .collect()
            })
            .collect();
        CoarseSpace::from_metric(
            labels,
            &dist,
            scales,
            Ambient::Window { family: "z2".into(), radius: radius as u32 },
        )
        .unwrap()
    }

    #[test]
    fn shear_action_fails_isocoarseness() {
        let s = lattice(6, &[0.0, 1.0, 2.0, 3.0]);
        let action = shear_action(&s);
        let report = check_action(&action, &s, 6).unwrap();
        match &report.isocoarse {
            Isocoarseness::FailsAt { level, .. } => assert_eq!(*level, 1),
            other => panic!("shear must fail isocoarseness, got {other:?}"),
        }
        assert!(!report.passes_equivariant_gate());
    }

    #[test]
    fn greedy_discretization_of_a_line() {
        let s = line(-6, 6, &[0.0, 1.0, 2.0]);
        let d = discretize(&s, 2, None, GreedySeed::Ascending).unwrap();
        let labels: Vec<&str> = d.chosen.members.iter().map(|&p| s.label(p)).collect();
        assert_eq!(labels, vec!["-6", "-3", "0", "3", "6"]);
        assert!(d.separated && d.dense && d.equivariant && !d.enlarged);
        assert!(d.closeness.is_some());
        for x in s.points() {
            assert!(d.chosen.contains(d.projection[x.idx()]));
        }
    }

    #[test]
    fn already_separated_space_is_a_fixpoint() {
        let s = line(0, 4, &[0.0, 1.0]);
        let d = discretize(&s, 0, None, GreedySeed::Ascending).unwrap();
        assert_eq!(d.chosen.members.len(), s.len());
        assert!(s.points().all(|p| d.projection[p.idx()] == p));
        assert_eq!(d.closeness, Some(0));
    }

    #[test]
    fn equivariant_discretization_of_reflection() {
        let s = line(-6, 6, &[0.0, 1.0, 2.0]);
        let action = reflection_action(&s);
        let d = discretize(&s, 2, Some(&action), GreedySeed::Ascending).unwrap();
        let labels: Vec<&str> = d.chosen.members.iter().map(|&p| s.label(p)).collect();
        assert_eq!(labels, vec!["-6", "-3", "0", "3", "6"]);
        assert!(d.separated && d.dense && d.equivariant);
    }

    #[test]
    fn equivariant_discretization_rejects_shear() {
        let s = lattice(4, &[0.0, 1.0, 2.0]);
        let action = shear_action(&s);
        let err = discretize(&s, 1, Some(&action), GreedySeed::Ascending);
        assert!(matches!(
            err,
            Err(CoarseError::NotIsocoarse(_)) | Err(CoarseError::NotBijective(_))
        ));
    }

    #[test]
    fn seeds_give_different_but_valid_discretizations() {
        let s = line(0, 7, &[0.0, 1.0]);
        let a = discretize(&s, 1, None, GreedySeed::Ascending).unwrap();
        let b = discretize(&s, 1, None, GreedySeed::Descending).unwrap();
        assert!(a.separated && a.dense);
        assert!(b.separated && b.dense);
        assert_ne!(a.chosen.members, b.chosen.members);
    }
}
