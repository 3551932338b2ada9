//! Homotopy cylinders over a finite tick grid.
//!
//! A cylinder `X × I` carries the coarse structure generated by the slicewise
//! entourages `E_n ×̄ Diag` and the interval entourage built from a
//! per-point neighborhood family `U_x` of the tick diagonal. Schedules pick,
//! per point, the tick subsequence along which prisms are subdivided; the
//! merge recursion interleaves these subsequences over a tuple.

use std::collections::BTreeSet;

use crate::error::{CoarseError, Result};
use crate::maps::{check_map_properties, CoarseMap, GroupAction, MapReport, PropertyVerdict};
use crate::space::{
    normalize_chain, product, Ambient, CoarseSpace, Entourage, PointId, SubsetRef,
    DEFAULT_PRODUCT_CAP,
};

/// Finite increasing tick values standing in for an interval `[a, b]`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntervalGrid {
    pub ticks: Vec<i64>,
}

impl IntervalGrid {
    pub fn new(ticks: Vec<i64>) -> Result<Self> {
        if ticks.len() < 2 || ticks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoarseError::GridTooSmall);
        }
        Ok(IntervalGrid { ticks })
    }

    pub fn range(lo: i64, hi: i64) -> Result<Self> {
        IntervalGrid::new((lo..=hi).collect())
    }

    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn last_index(&self) -> usize {
        self.ticks.len() - 1
    }
}

/// Per-point symmetric reflexive relations on tick indices, each containing
/// all adjacent pairs. Construction normalizes the input.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NeighborhoodFamily {
    per_point: Vec<BTreeSet<(usize, usize)>>,
    n_ticks: usize,
}

impl NeighborhoodFamily {
    pub fn new(
        grid: &IntervalGrid,
        n_points: usize,
        raw: impl Fn(usize) -> BTreeSet<(usize, usize)>,
    ) -> Result<Self> {
        let t = grid.len();
        let mut per_point = Vec::with_capacity(n_points);
        for x in 0..n_points {
            let mut u = BTreeSet::new();
            for (a, b) in raw(x) {
                if a >= t || b >= t {
                    return Err(CoarseError::BadNeighborhoods(format!(
                        "tick index out of range at point {x}"
                    )));
                }
                u.insert((a, b));
                u.insert((b, a));
            }
            for i in 0..t {
                u.insert((i, i));
                if i + 1 < t {
                    u.insert((i, i + 1));
                    u.insert((i + 1, i));
                }
            }
            per_point.push(u);
        }
        Ok(NeighborhoodFamily { per_point, n_ticks: t })
    }

    /// The coarsest family: every pair of ticks, at every point.
    pub fn full(grid: &IntervalGrid, n_points: usize) -> Self {
        let t = grid.len();
        let all: BTreeSet<(usize, usize)> =
            (0..t).flat_map(|a| (0..t).map(move |b| (a, b))).collect();
        NeighborhoodFamily { per_point: vec![all; n_points], n_ticks: t }
    }

    /// The finest admissible family: adjacent ticks only.
    pub fn adjacent(grid: &IntervalGrid, n_points: usize) -> Self {
        NeighborhoodFamily::new(grid, n_points, |_| BTreeSet::new()).unwrap()
    }

    pub fn at(&self, x: PointId) -> &BTreeSet<(usize, usize)> {
        &self.per_point[x.idx()]
    }

    pub fn contains(&self, x: PointId, s: usize, t: usize) -> bool {
        self.per_point[x.idx()].contains(&(s, t))
    }

    /// Strict equivariance `U_{xγ} = U_x` for every enumerated element.
    pub fn verify_equivariant(&self, action: &GroupAction, word_cap: usize) -> Result<()> {
        let (elements, _) = action.enumerate_elements(word_cap);
        for el in &elements {
            for x in 0..self.per_point.len() {
                if let Some(xg) = el.apply(PointId(x as u32)) {
                    if self.per_point[x] != self.per_point[xg.idx()] {
                        return Err(CoarseError::BadNeighborhoods(format!(
                            "family not invariant at point {x}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `X × ticks` with the generated coarse structure and index bookkeeping.
#[derive(Clone, Debug)]
pub struct Cylinder {
    pub space: CoarseSpace,
    pub base_len: usize,
    pub grid: IntervalGrid,
}

impl Cylinder {
    pub fn point(&self, x: PointId, tick: usize) -> PointId {
        PointId(x.0 * self.grid.len() as u32 + tick as u32)
    }

    pub fn split(&self, p: PointId) -> (PointId, usize) {
        let t = self.grid.len() as u32;
        (PointId(p.0 / t), (p.0 % t) as usize)
    }
}

/// Cylinder on `X × I`, chain normalized from `{E_n ×̄ Diag} ∪ {E_U}` at the
/// requested depth. Bounded subsets are exactly those inside `K × I` for a
/// bounded `K ⊆ X` once the depth allows the tick paths to compose.
pub fn build_cylinder(
    x: &CoarseSpace,
    grid: &IntervalGrid,
    u: &NeighborhoodFamily,
    depth: usize,
) -> Result<Cylinder> {
    let t = grid.len();
    if u.n_ticks != t || u.per_point.len() != x.len() {
        return Err(CoarseError::BadNeighborhoods("family does not match grid/space".into()));
    }
    let n = x
        .len()
        .checked_mul(t)
        .filter(|&n| n <= DEFAULT_PRODUCT_CAP)
        .ok_or_else(|| CoarseError::CapExceeded("cylinder too large".into()))?;
    let mut labels = Vec::with_capacity(n);
    for p in x.points() {
        for tick in &grid.ticks {
            labels.push(format!("({})@{tick}", x.label(p)));
        }
    }
    let idx = |p: PointId, tick: usize| PointId(p.0 * t as u32 + tick as u32);
    let mut e_u_pairs = BTreeSet::new();
    for p in x.points() {
        for &(a, b) in u.at(p) {
            e_u_pairs.insert((idx(p, a), idx(p, b)));
        }
    }
    let e_u = Entourage::from_pairs(n, e_u_pairs)?;
    let mut generators = Vec::with_capacity(x.depth());
    for lvl in 1..=x.depth() {
        let mut pairs = BTreeSet::new();
        for (a, b) in x.chain().level(lvl).iter() {
            for tick in 0..t {
                pairs.insert((idx(a, tick), idx(b, tick)));
            }
        }
        let slice = Entourage::from_pairs(n, pairs)?;
        generators.push(slice.union(&e_u)?);
    }
    if generators.is_empty() {
        generators.push(e_u);
    }
    let chain = normalize_chain(&generators, depth)?;
    let ambient = x.ambient().clone();
    let space = CoarseSpace::new(labels, chain, ambient)?;
    Ok(Cylinder { space, base_len: x.len(), grid: grid.clone() })
}

/// Per-point tick subsequences `a = s_0 < … < s_k = b` such that every tick
/// between consecutive picks is `U_x`-related to both.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SubdivisionSchedule {
    pub per_point: Vec<Vec<usize>>,
}

impl SubdivisionSchedule {
    pub fn steps(&self, x: PointId) -> usize {
        self.per_point[x.idx()].len() - 1
    }
}

/// Greedy left-to-right schedule: from each pick, jump to the furthest tick
/// that keeps the consecutive-window condition. Adjacent pairs always work,
/// so the schedule is total. With an action the family must be invariant,
/// which makes the schedule invariant as well.
pub fn derive_schedule(
    grid: &IntervalGrid,
    u: &NeighborhoodFamily,
    action: Option<&GroupAction>,
) -> Result<SubdivisionSchedule> {
    if let Some(action) = action {
        u.verify_equivariant(action, crate::maps::DEFAULT_WORD_CAP)?;
    }
    let t = grid.len();
    let mut per_point = Vec::with_capacity(u.per_point.len());
    for x in 0..u.per_point.len() {
        let ux = &u.per_point[x];
        let valid = |a: usize, c: usize| (a..=c).all(|s| ux.contains(&(s, a)) && ux.contains(&(s, c)));
        let mut picks = vec![0usize];
        let mut cur = 0usize;
        while cur < t - 1 {
            let next = (cur + 1..t).rev().find(|&c| valid(cur, c)).ok_or_else(|| {
                CoarseError::BadNeighborhoods(format!("no admissible step at point {x}"))
            })?;
            picks.push(next);
            cur = next;
        }
        per_point.push(picks);
    }
    Ok(SubdivisionSchedule { per_point })
}

/// One term of the merged prism subdivision: the inserted coordinate and the
/// `(p+2)`-tuple of (base point, tick index) pairs.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MergeStep {
    pub pivot: usize,
    pub entries: Vec<(PointId, usize)>,
}

/// The merge recursion over a tuple: at each step the coordinate whose next
/// scheduled tick is smallest (ties to the smallest index) advances, emitting
/// the tuple that repeats the advancing coordinate at its old and new ticks.
pub fn merge_tuple(schedule: &SubdivisionSchedule, tuple: &[PointId]) -> Vec<MergeStep> {
    let k_total: usize = tuple.iter().map(|&x| schedule.steps(x)).sum();
    let mut j = vec![0usize; tuple.len()];
    let mut out = Vec::with_capacity(k_total);
    for _l in 1..=k_total {
        let mut pivot: Option<(usize, usize)> = None; // (next tick value, coord)
        for (i, &x) in tuple.iter().enumerate() {
            let picks = &schedule.per_point[x.idx()];
            if j[i] + 1 < picks.len() {
                let next = picks[j[i] + 1];
                if pivot.map_or(true, |(bv, bi)| (next, i) < (bv, bi)) {
                    pivot = Some((next, i));
                }
            }
        }
        let (_, i_star) = pivot.expect("merge exhausted early");
        let mut entries = Vec::with_capacity(tuple.len() + 1);
        for (i, &x) in tuple.iter().enumerate() {
            let picks = &schedule.per_point[x.idx()];
            if i == i_star {
                entries.push((x, picks[j[i]]));
                entries.push((x, picks[j[i] + 1]));
            } else {
                entries.push((x, picks[j[i]]));
            }
        }
        j[i_star] += 1;
        out.push(MergeStep { pivot: i_star, entries });
    }
    debug_assert!(tuple
        .iter()
        .enumerate()
        .all(|(i, &x)| j[i] == schedule.steps(x)));
    out
}

/// Integer profile on a space, with an optional declared bound to verify.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Profile {
    pub values: Vec<i64>,
    pub bound: Option<i64>,
}

impl Profile {
    pub fn constant(n_points: usize, v: i64) -> Self {
        Profile { values: vec![v; n_points], bound: Some(v.abs()) }
    }

    pub fn verify(&self, space: &CoarseSpace) -> Result<()> {
        if self.values.len() != space.len() {
            return Err(CoarseError::TableMismatch(self.values.len(), space.len()));
        }
        if let Some(b) = self.bound {
            if let Some(i) = self.values.iter().position(|v| v.abs() > b) {
                return Err(CoarseError::ProfileBoundViolated(i));
            }
        }
        Ok(())
    }

    /// Controlled within depth, viewed as a map into the tick line? Recorded
    /// for reports; bornological always holds on a finite window.
    pub fn classify(&self, space: &CoarseSpace, grid: &IntervalGrid) -> ProfileClass {
        let mut spread = 0i64;
        for (a, b) in space.chain().top().iter() {
            spread = spread.max((self.values[a.idx()] - self.values[b.idx()]).abs());
        }
        let grid_span = grid.ticks.last().unwrap() - grid.ticks[0];
        ProfileClass { bornological: true, controlled_within_depth: spread <= grid_span }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ProfileClass {
    pub bornological: bool,
    pub controlled_within_depth: bool,
}

/// A lifted classical homotopy: the cylinder, the family it was built from,
/// and the assignment on cylinder points.
#[derive(Debug)]
pub struct LiftedHomotopy {
    pub cylinder: Cylinder,
    pub family: NeighborhoodFamily,
    pub assignment: Vec<PointId>,
    pub rho_minus_class: ProfileClass,
    pub rho_plus_class: ProfileClass,
}

/// Lift `H: X × ℤ-window → Y` with profiles `ρ±` to a cylinder homotopy.
///
/// The family widens below `ρ−(x)` and above `ρ+(x)` and is near-diagonal in
/// between; `H` must already be constant outside `[ρ−(x), ρ+(x)]`.
pub fn lift_classical(
    x: &CoarseSpace,
    y: &CoarseSpace,
    grid: &IntervalGrid,
    classical: &[Vec<PointId>],
    rho_minus: &Profile,
    rho_plus: &Profile,
    depth: usize,
) -> Result<LiftedHomotopy> {
    rho_minus.verify(x)?;
    rho_plus.verify(x)?;
    if classical.len() != x.len() || classical.iter().any(|row| row.len() != grid.len()) {
        return Err(CoarseError::BadHomotopy("assignment does not cover the grid".into()));
    }
    if let Some(bad) = classical.iter().flatten().find(|q| q.idx() >= y.len()) {
        return Err(CoarseError::PointOutOfRange(bad.idx(), y.len()));
    }
    let lo = grid.ticks[0];
    let hi = *grid.ticks.last().unwrap();
    for p in x.points() {
        let (rm, rp) = (rho_minus.values[p.idx()], rho_plus.values[p.idx()]);
        if rm < lo || rp > hi {
            return Err(CoarseError::ProfileOutOfRange(p.idx()));
        }
        let row = &classical[p.idx()];
        for (i, &t) in grid.ticks.iter().enumerate() {
            if t <= rm && row[i] != row[0] {
                return Err(CoarseError::BadHomotopy(format!(
                    "not constant below rho- at point {}",
                    x.label(p)
                )));
            }
            if t >= rp && row[i] != row[grid.last_index()] {
                return Err(CoarseError::BadHomotopy(format!(
                    "not constant above rho+ at point {}",
                    x.label(p)
                )));
            }
        }
    }
    let family = NeighborhoodFamily::new(grid, x.len(), |xi| {
        let rm = rho_minus.values[xi];
        let rp = rho_plus.values[xi];
        let mut u = BTreeSet::new();
        for (a, &ta) in grid.ticks.iter().enumerate() {
            for (b, &tb) in grid.ticks.iter().enumerate() {
                if (ta < rm && tb < rm) || (ta > rp && tb > rp) {
                    u.insert((a, b));
                }
            }
        }
        u
    })?;
    let cylinder = build_cylinder(x, grid, &family, depth)?;
    let mut assignment = vec![PointId(0); cylinder.space.len()];
    for p in x.points() {
        for tick in 0..grid.len() {
            assignment[cylinder.point(p, tick).idx()] = classical[p.idx()][tick];
        }
    }
    let rho_minus_class = rho_minus.classify(x, grid);
    let rho_plus_class = rho_plus.classify(x, grid);
    Ok(LiftedHomotopy { cylinder, family, assignment, rho_minus_class, rho_plus_class })
}

#[derive(Debug)]
pub struct HomotopyReport {
    pub map_report: MapReport,
    pub restricts_to_f: std::result::Result<(), PointId>,
    pub restricts_to_g: std::result::Result<(), PointId>,
    pub relative_ok: Option<bool>,
}

impl HomotopyReport {
    pub fn is_valid(&self) -> bool {
        self.map_report.controlled.within_depth()
            && !matches!(self.map_report.proper, PropertyVerdict::Fails { .. })
            && self.restricts_to_f.is_ok()
            && self.restricts_to_g.is_ok()
            && self.relative_ok.unwrap_or(true)
    }
}

/// Coarseness of `H` as a map off the cylinder plus the endpoint and relative
/// restriction checks.
pub fn validate_homotopy(
    cylinder: &Cylinder,
    target: &CoarseSpace,
    assignment: &[PointId],
    f_images: &[PointId],
    g_images: &[PointId],
    relative: Option<(&SubsetRef, &SubsetRef)>,
) -> Result<HomotopyReport> {
    if assignment.len() != cylinder.space.len() {
        return Err(CoarseError::NonTotalAssignment(assignment.len()));
    }
    let map = CoarseMap::single(cylinder.space.clone(), target.clone(), assignment.to_vec())?;
    let map_report = check_map_properties(&map)?;
    let last = cylinder.grid.last_index();
    let mut restricts_to_f = Ok(());
    let mut restricts_to_g = Ok(());
    for x in 0..cylinder.base_len {
        let p = PointId(x as u32);
        if assignment[cylinder.point(p, 0).idx()] != f_images[x] {
            restricts_to_f = Err(p);
            break;
        }
    }
    for x in 0..cylinder.base_len {
        let p = PointId(x as u32);
        if assignment[cylinder.point(p, last).idx()] != g_images[x] {
            restricts_to_g = Err(p);
            break;
        }
    }
    let relative_ok = relative.map(|(a, b)| {
        a.members.iter().all(|&p| {
            (0..cylinder.grid.len())
                .all(|tick| b.contains(assignment[cylinder.point(p, tick).idx()]))
        })
    });
    Ok(HomotopyReport { map_report, restricts_to_f, restricts_to_g, relative_ok })
}

// ---------------------------------------------------------------------------
// flasqueness

/// A self-map presented across window stages; `None` images escaped.
#[derive(Clone, Debug)]
pub struct FlasqueStage {
    pub radius: u32,
    pub space: CoarseSpace,
    pub phi: Vec<Option<PointId>>,
}

#[derive(Clone, Debug)]
pub struct FlasqueData {
    pub stages: Vec<FlasqueStage>,
}

impl FlasqueData {
    pub fn single(space: CoarseSpace, phi: Vec<Option<PointId>>) -> Self {
        FlasqueData { stages: vec![FlasqueStage { radius: 0, space, phi }] }
    }
}

#[derive(Debug)]
pub struct FlasqueReport {
    /// Least level containing every `(x, φx)`, worst stage.
    pub closeness: Option<usize>,
    /// Images of iterates eventually miss every tested bounded set, with the
    /// escape time stable across the last two stages.
    pub escape: PropertyVerdict,
    /// One target level per source level covering all iterates.
    pub equicontrolled: std::result::Result<Vec<usize>, (usize, (PointId, PointId), usize)>,
    pub equivariant: Option<bool>,
}

impl FlasqueReport {
    pub fn passes(&self) -> bool {
        self.closeness.is_some()
            && self.escape.holds()
            && self.equicontrolled.is_ok()
            && self.equivariant.unwrap_or(true)
    }
}

fn iterate(phi: &[Option<PointId>], p: PointId, n: usize) -> Option<PointId> {
    let mut cur = p;
    for _ in 0..n {
        cur = phi[cur.idx()]?;
    }
    Some(cur)
}

/// Closeness, eventual escape from bounded sets, and equicontrolledness of a
/// window family of self-maps, with equivariance when an action is attached.
pub fn flasque_check(
    data: &FlasqueData,
    horizon: usize,
    action: Option<&GroupAction>,
) -> Result<FlasqueReport> {
    let base = &data.stages[0];

    // (1) closeness of phi to the identity, worst over stages
    let mut closeness = Some(0usize);
    for st in &data.stages {
        let graph = Entourage::from_pairs(
            st.space.len(),
            st.space
                .points()
                .filter_map(|x| st.phi[x.idx()].map(|y| (x, y))),
        )?;
        match st.space.chain().level_containing(&graph) {
            Some(m) => closeness = closeness.map(|c| c.max(m)),
            None => closeness = None,
        }
    }

    // (2) escape: per tested bounded set, the first time all later iterate
    // images miss it; must exist and be stable across the last two stages
    let escape_time = |st: &FlasqueStage, k_labels: &BTreeSet<String>| -> Option<usize> {
        let k: BTreeSet<PointId> = k_labels
            .iter()
            .filter_map(|l| st.space.index_of_label(l))
            .collect();
        let mut last_hit: Option<usize> = None;
        let mut frontier: Vec<PointId> = st.space.points().collect();
        for n in 0..=horizon {
            if frontier.iter().any(|q| k.contains(q)) {
                last_hit = Some(n);
            }
            frontier = frontier
                .iter()
                .filter_map(|&q| st.phi[q.idx()])
                .collect();
            frontier.sort_unstable();
            frontier.dedup();
        }
        match last_hit {
            None => Some(0),
            Some(h) if h < horizon => Some(h + 1),
            Some(_) => None,
        }
    };
    let mut escape = PropertyVerdict::Holds { witness: "all tested bounded sets escaped".into() };
    'balls: for y in base.space.points() {
        let k_labels: BTreeSet<String> =
            crate::space::penumbra(base.space.chain().top(), &BTreeSet::from([y]))
                .iter()
                .map(|&p| base.space.label(p).to_string())
                .collect();
        let times: Vec<Option<usize>> =
            data.stages.iter().map(|st| escape_time(st, &k_labels)).collect();
        if times.iter().any(Option::is_none) {
            escape = PropertyVerdict::Inconclusive {
                reason: format!(
                    "ball around {} not escaped within horizon {horizon}",
                    base.space.label(y)
                ),
            };
            break 'balls;
        }
        if data.stages.len() >= 2 {
            let a = times[times.len() - 2].unwrap();
            let b = times[times.len() - 1].unwrap();
            if a != b {
                escape = PropertyVerdict::Fails {
                    counterexample: format!(
                        "escape time of the ball around {} grows with the window: {a} then {b}",
                        base.space.label(y)
                    ),
                };
                break 'balls;
            }
        }
    }

    // (3) equicontrolled: one covering level per source level, all iterates
    let last = data.stages.last().unwrap();
    let mut per_level = Vec::with_capacity(last.space.depth() + 1);
    let mut equi_err = None;
    'levels: for lvl in 0..=last.space.depth() {
        let mut m_needed = 0usize;
        for n in 0..=horizon {
            for (a, b) in last.space.chain().level(lvl).iter() {
                let (Some(a2), Some(b2)) = (iterate(&last.phi, a, n), iterate(&last.phi, b, n))
                else {
                    continue;
                };
                match last.space.chain().level_of_pair(a2, b2) {
                    Some(m) => m_needed = m_needed.max(m),
                    None => {
                        equi_err = Some((lvl, (a, b), n));
                        break 'levels;
                    }
                }
            }
        }
        per_level.push(m_needed);
    }
    let equicontrolled = match equi_err {
        None => Ok(per_level),
        Some(e) => Err(e),
    };

    let equivariant = match action {
        None => None,
        Some(action) => {
            let (elements, _) = action.enumerate_elements(crate::maps::DEFAULT_WORD_CAP);
            Some(base.space.points().all(|x| {
                elements.iter().all(|el| {
                    match (el.apply(x), base.phi[x.idx()]) {
                        (Some(xg), Some(fx)) => match base.phi[xg.idx()] {
                            Some(fxg) => el.apply(fx).map_or(true, |v| v == fxg),
                            None => true,
                        },
                        _ => true,
                    }
                })
            }))
        }
    };

    Ok(FlasqueReport { closeness, escape, equicontrolled, equivariant })
}

// ---------------------------------------------------------------------------
// homotopy-domain spaces

/// The four subspaces of `X × ℤ` cut out by a profile.
#[derive(Debug)]
pub struct HomotopyDomains {
    pub ambient_product: CoarseSpace,
    /// `{(x,n) | n ≥ ρ(x)}`
    pub above: (CoarseSpace, Vec<PointId>),
    /// `{(x,n) | n ≤ ρ(x)}`
    pub below: (CoarseSpace, Vec<PointId>),
    /// `{(x,ρ(x))}`
    pub graph: (CoarseSpace, Vec<PointId>),
    /// `{(x,n) | 0 ≤ n ≤ ρ(x)}`
    pub band: (CoarseSpace, Vec<PointId>),
}

/// Build `X_ρ`, `X^ρ`, `X_ρ^ρ`, `X_0^ρ` inside `X × (ℤ ∩ [-radius, radius])`.
pub fn build_homotopy_domains(
    x: &CoarseSpace,
    rho: &Profile,
    z_radius: i64,
    scales: &[f64],
) -> Result<HomotopyDomains> {
    rho.verify(x)?;
    if let Some(i) = rho.values.iter().position(|v| v.abs() > z_radius) {
        return Err(CoarseError::ProfileOutOfRange(i));
    }
    let line = CoarseSpace::integer_line(
        -z_radius,
        z_radius,
        scales,
        Ambient::Window { family: "z".into(), radius: z_radius as u32 },
    )?;
    let prod = product(x, &line, DEFAULT_PRODUCT_CAP)?;
    let t = line.len() as i64;
    let coord = |p: PointId| -> (usize, i64) {
        let xi = (p.0 as i64 / t) as usize;
        let n = -z_radius + (p.0 as i64 % t);
        (xi, n)
    };
    let cut = |pred: &dyn Fn(usize, i64) -> bool| -> Result<(CoarseSpace, Vec<PointId>)> {
        let members: BTreeSet<PointId> = prod
            .points()
            .filter(|&p| {
                let (xi, n) = coord(p);
                pred(xi, n)
            })
            .collect();
        let subset = SubsetRef { members };
        Ok(prod.subspace(&subset))
    };
    let above = cut(&|xi, n| n >= rho.values[xi])?;
    let below = cut(&|xi, n| n <= rho.values[xi])?;
    let graph = cut(&|xi, n| n == rho.values[xi])?;
    let band = cut(&|xi, n| 0 <= n && n <= rho.values[xi])?;
    Ok(HomotopyDomains { ambient_product: prod, above, below, graph, band })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::space::tests::line;
    use crate::space::is_bounded;

    #[test]
    fn full_family_bounds_slices_at_level_one() {
        let x = line(-2, 2, &[0.0, 1.0]);
        let grid = IntervalGrid::range(0, 3).unwrap();
        let u = NeighborhoodFamily::full(&grid, x.len());
        let cyl = build_cylinder(&x, &grid, &u, 2).unwrap();
        // every slice pair sits in level 1
        let p0 = cyl.point(PointId(0), 0);
        let p3 = cyl.point(PointId(0), 3);
        assert_eq!(cyl.space.chain().level_of_pair(p0, p3), Some(1));
        let slice = cyl.space.subset((0..grid.len()).map(|t| cyl.point(PointId(0), t))).unwrap();
        assert_eq!(is_bounded(&cyl.space, &slice).level(), Some(1));
    }

    #[test]
    fn adjacent_family_needs_path_composition() {
        let x = line(0, 0, &[0.0, 1.0]);
        let grid = IntervalGrid::range(0, 3).unwrap();
        let u = NeighborhoodFamily::adjacent(&grid, x.len());
        let cyl = build_cylinder(&x, &grid, &u, 3).unwrap();
        let ends = cyl.space.chain().level_of_pair(cyl.point(PointId(0), 0), cyl.point(PointId(0), 3));
        assert_eq!(ends, Some(3), "three adjacent steps compose at level 3");
        let slice = cyl.space.subset(cyl.space.points()).unwrap();
        assert!(is_bounded(&cyl.space, &slice).level().unwrap() <= 3);
    }

    #[test]
    fn cylinder_bounded_sets_are_base_bounded_times_interval() {
        let x = line(-5, 5, &[0.0, 1.0, 2.0]);
        let grid = IntervalGrid::range(0, 3).unwrap();
        let u = NeighborhoodFamily::full(&grid, x.len());
        let cyl = build_cylinder(&x, &grid, &u, 2).unwrap();
        // K x I for bounded K is bounded
        let k: Vec<PointId> = (0..3u32).map(PointId).collect();
        let kxi = cyl
            .space
            .subset(k.iter().flat_map(|&p| (0..grid.len()).map(move |t| (p, t))).map(|(p, t)| cyl.point(p, t)))
            .unwrap();
        assert!(is_bounded(&cyl.space, &kxi).is_bounded());
        // and a bounded set of the cylinder projects to a bounded set
        let whole = cyl.space.subset(cyl.space.points()).unwrap();
        assert!(!is_bounded(&cyl.space, &whole).is_bounded());
    }

    #[test]
    fn schedule_for_full_family_is_one_step() {
        let grid = IntervalGrid::range(0, 3).unwrap();
        let u = NeighborhoodFamily::full(&grid, 2);
        let s = derive_schedule(&grid, &u, None).unwrap();
        assert_eq!(s.per_point[0], vec![0, 3]);
        assert_eq!(s.steps(PointId(0)), 1);
    }

    #[test]
    fn schedule_for_adjacent_family_takes_every_tick() {
        let grid = IntervalGrid::range(0, 3).unwrap();
        let u = NeighborhoodFamily::adjacent(&grid, 1);
        let s = derive_schedule(&grid, &u, None).unwrap();
        assert_eq!(s.per_point[0], vec![0, 1, 2, 3]);
        assert_eq!(s.steps(PointId(0)), 3);
    }

    #[test]
    fn merge_recursion_interleaves_by_value_then_index() {
        // point 0 has picks (0,2,3); point 1 has picks (0,3)
        let schedule = SubdivisionSchedule { per_point: vec![vec![0, 2, 3], vec![0, 3]] };
        let steps = merge_tuple(&schedule, &[PointId(0), PointId(1)]);
        assert_eq!(steps.len(), 3);
        // first step advances coordinate 0 (next value 2 < 3)
        assert_eq!(steps[0].pivot, 0);
        assert_eq!(steps[0].entries, vec![(PointId(0), 0), (PointId(0), 2), (PointId(1), 0)]);
        // then coordinate 0 again (value 3 ties with coordinate 1, smaller index wins)
        assert_eq!(steps[1].pivot, 0);
        assert_eq!(steps[1].entries, vec![(PointId(0), 2), (PointId(0), 3), (PointId(1), 0)]);
        // finally coordinate 1
        assert_eq!(steps[2].pivot, 1);
        assert_eq!(steps[2].entries, vec![(PointId(0), 3), (PointId(1), 0), (PointId(1), 3)]);
    }

    #[test]
    fn merged_tuples_stay_near_the_cylinder_multidiagonal() {
        let x = line(-4, 4, &[0.0, 1.0, 2.0]);
        let grid = IntervalGrid::range(0, 3).unwrap();
        let u = NeighborhoodFamily::adjacent(&grid, x.len());
        let cyl = build_cylinder(&x, &grid, &u, 4).unwrap();
        let schedule = derive_schedule(&grid, &u, None).unwrap();
        // tuples within a level-1 penumbra of the multidiagonal
        for a in x.points() {
            for b in x.points() {
                if !x.chain().level(1).contains(a, b) {
                    continue;
                }
                for step in merge_tuple(&schedule, &[a, b]) {
                    // all entries pairwise within a fixed cylinder level
                    let mut worst = Some(0usize);
                    for &(p, t) in &step.entries {
                        for &(q, s) in &step.entries {
                            let lvl = cyl
                                .space
                                .chain()
                                .level_of_pair(cyl.point(p, t), cyl.point(q, s));
                            worst = match (worst, lvl) {
                                (Some(w), Some(l)) => Some(w.max(l)),
                                _ => None,
                            };
                        }
                    }
                    assert!(worst.is_some() && worst.unwrap() <= 2, "prism support exceeded");
                }
            }
        }
    }

    #[test]
    fn equivariant_schedule_matches_orbits() {
        let x = line(-3, 3, &[0.0, 1.0, 2.0]);
        let action = crate::maps::tests::reflection_action(&x);
        let grid = IntervalGrid::range(0, 2).unwrap();
        let u = NeighborhoodFamily::adjacent(&grid, x.len());
        let s = derive_schedule(&grid, &u, Some(&action)).unwrap();
        for p in x.points() {
            let v: i64 = x.label(p).parse().unwrap();
            let q = x.index_of_label(&(-v).to_string()).unwrap();
            assert_eq!(s.per_point[p.idx()], s.per_point[q.idx()]);
        }
    }

    #[test]
    fn lift_constant_homotopy() {
        let x = line(-3, 3, &[0.0, 1.0, 2.0, 3.0, 4.0]);
        let grid = IntervalGrid::range(-2, 4).unwrap();
        let classical: Vec<Vec<PointId>> =
            x.points().map(|p| vec![p; grid.len()]).collect();
        let rm = Profile::constant(x.len(), 0);
        let rp = Profile::constant(x.len(), 1);
        let lift = lift_classical(&x, &x, &grid, &classical, &rm, &rp, 2).unwrap();
        let ids: Vec<PointId> = x.points().collect();
        let report =
            validate_homotopy(&lift.cylinder, &x, &lift.assignment, &ids, &ids, None).unwrap();
        assert!(report.is_valid());
        assert!(lift.rho_minus_class.bornological);
    }

    #[test]
    fn lift_shift_homotopy() {
        let x = line(-6, 6, &[0.0, 1.0, 2.0, 3.0]);
        let y = line(-6, 9, &[0.0, 1.0, 2.0, 3.0, 4.0]);
        let grid = IntervalGrid::range(-1, 4).unwrap();
        let classical: Vec<Vec<PointId>> = x
            .points()
            .map(|p| {
                let v: i64 = x.label(p).parse().unwrap();
                grid.ticks
                    .iter()
                    .map(|&t| y.index_of_label(&(v + t.clamp(0, 3)).to_string()).unwrap())
                    .collect()
            })
            .collect();
        let rm = Profile::constant(x.len(), 0);
        let rp = Profile::constant(x.len(), 3);
        let lift = lift_classical(&x, &y, &grid, &classical, &rm, &rp, 2).unwrap();
        let f: Vec<PointId> = x
            .points()
            .map(|p| y.index_of_label(x.label(p)).unwrap())
            .collect();
        let g: Vec<PointId> = x
            .points()
            .map(|p| {
                let v: i64 = x.label(p).parse().unwrap();
                y.index_of_label(&(v + 3).to_string()).unwrap()
            })
            .collect();
        let report = validate_homotopy(&lift.cylinder, &y, &lift.assignment, &f, &g, None).unwrap();
        assert!(report.is_valid(), "shift homotopy must validate: {report:?}");
    }

    #[test]
    fn rejects_homotopy_that_is_not_eventually_constant() {
        let x = line(0, 2, &[0.0, 1.0]);
        let grid = IntervalGrid::range(0, 2).unwrap();
        // varies after rho+
        let classical: Vec<Vec<PointId>> = x
            .points()
            .map(|p| vec![p, p, PointId((p.0 + 1) % 3)])
            .collect();
        let rm = Profile::constant(x.len(), 0);
        let rp = Profile::constant(x.len(), 1);
        let err = lift_classical(&x, &x, &grid, &classical, &rm, &rp, 2);
        assert!(matches!(err, Err(CoarseError::BadHomotopy(_))));
    }

    #[test]
    fn last_tick_flip_fails_controlledness() {
        let x = line(-5, 5, &[0.0, 1.0, 2.0]);
        let grid = IntervalGrid::range(0, 2).unwrap();
        let u = NeighborhoodFamily::full(&grid, x.len());
        let cyl = build_cylinder(&x, &grid, &u, 3).unwrap();
        let mut assignment = vec![PointId(0); cyl.space.len()];
        for p in x.points() {
            for t in 0..grid.len() {
                let v: i64 = x.label(p).parse().unwrap();
                let img = if t == grid.last_index() { -v } else { v };
                assignment[cyl.point(p, t).idx()] = x.index_of_label(&img.to_string()).unwrap();
            }
        }
        let ids: Vec<PointId> = x.points().collect();
        let neg: Vec<PointId> = x
            .points()
            .map(|p| {
                let v: i64 = x.label(p).parse().unwrap();
                x.index_of_label(&(-v).to_string()).unwrap()
            })
            .collect();
        let report = validate_homotopy(&cyl, &x, &assignment, &ids, &neg, None).unwrap();
        assert!(!report.is_valid(), "the flip at the last tick is not controlled");
    }

    pub fn ray_window(radius: i64, scales: &[f64]) -> CoarseSpace {
        let labels: Vec<String> = (0..=radius).map(|x| x.to_string()).collect();
        let dist: Vec<Vec<f64>> = (0..=radius)
            .map(|x| (0..=radius).map(|y| (x - y).abs() as f64).collect())
            .collect();
        CoarseSpace::from_metric(
            labels,
            &dist,
            scales,
            Ambient::Window { family: "ray".into(), radius: radius as u32 },
        )
        .unwrap()
    }

    fn ray_shift(radius: i64) -> FlasqueStage {
        let s = ray_window(radius, &[0.0, 1.0, 2.0, 3.0]);
        let phi: Vec<Option<PointId>> = s
            .points()
            .map(|p| {
                let v: i64 = s.label(p).parse().unwrap();
                s.index_of_label(&(v + 1).to_string())
            })
            .collect();
        FlasqueStage { radius: radius as u32, space: s, phi }
    }

    #[test]
    fn ray_shift_is_flasque() {
        let data = FlasqueData { stages: vec![ray_shift(12), ray_shift(18)] };
        let report = flasque_check(&data, 30, None).unwrap();
        assert_eq!(report.closeness, Some(1));
        assert!(report.escape.holds(), "{:?}", report.escape);
        assert!(report.equicontrolled.is_ok());
        assert!(report.passes());
    }

    fn line_shift(radius: i64) -> FlasqueStage {
        let s = crate::maps::tests::line_window(radius, &[0.0, 1.0, 2.0, 3.0]);
        let phi: Vec<Option<PointId>> = s
            .points()
            .map(|p| {
                let v: i64 = s.label(p).parse().unwrap();
                s.index_of_label(&(v + 1).to_string())
            })
            .collect();
        FlasqueStage { radius: radius as u32, space: s, phi }
    }

    #[test]
    fn two_sided_shift_fails_escape() {
        let data = FlasqueData { stages: vec![line_shift(6), line_shift(9)] };
        let report = flasque_check(&data, 30, None).unwrap();
        assert!(
            matches!(report.escape, PropertyVerdict::Fails { .. }),
            "escape should grow with the window: {:?}",
            report.escape
        );
        assert!(!report.passes());
    }

    #[test]
    fn homotopy_domains_counts() {
        let x = line(-3, 3, &[0.0, 1.0, 2.0]);
        // constant profile 1: the band 0..=1 has two ticks per point
        let rho = Profile::constant(x.len(), 1);
        let domains = build_homotopy_domains(&x, &rho, 4, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(domains.band.0.len(), 2 * x.len());
        assert_eq!(domains.graph.0.len(), x.len());
        // zero profile: the band collapses onto a copy of X
        let rho0 = Profile::constant(x.len(), 0);
        let d0 = build_homotopy_domains(&x, &rho0, 4, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(d0.band.0.len(), x.len());
        // |x| profile: the graph picks one tick per point and includes into the band
        let rho_abs = Profile {
            values: x.points().map(|p| x.label(p).parse::<i64>().unwrap().abs()).collect(),
            bound: Some(3),
        };
        let d = build_homotopy_domains(&x, &rho_abs, 4, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(d.graph.0.len(), x.len());
        assert!(d.band.0.len() > x.len());
    }
}
