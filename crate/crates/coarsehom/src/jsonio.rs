//! JSON interchange for spaces, maps, actions, homology reports, schedules,
//! and sparse matrix-market export of assembled complexes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::complexes::GradedComplex;
use crate::error::{CoarseError, Result};
use crate::homotopy::{NeighborhoodFamily, SubdivisionSchedule};
use crate::linalg::{GroupData, Ring};
use crate::maps::{ActionGenerator, GroupAction, SignedPerm};
use crate::rips::SimplicialComplex;
use crate::space::{normalize_chain, Ambient, CoarseSpace, Entourage, PointId};

#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct AmbientJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<u32>,
}

/// Space presentation: a metric plus scales, or explicit generators plus a
/// normalization depth.
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct SpaceJson {
    pub points: Vec<String>,
    #[serde(default)]
    pub metric: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub generators: Vec<Vec<[u32; 2]>>,
    /// Exact chain levels (1..), for lossless round trips; `generators` are
    /// normalized instead when this is absent.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<Vec<[u32; 2]>>,
    #[serde(default)]
    pub scales: Vec<f64>,
    #[serde(default)]
    pub depth: Option<usize>,
    pub ambient: AmbientJson,
}

impl SpaceJson {
    pub fn to_space(&self) -> Result<CoarseSpace> {
        let ambient = match self.ambient.kind.as_str() {
            "finite" => Ambient::Finite,
            "window" => Ambient::Window {
                family: self.ambient.family.clone().unwrap_or_default(),
                radius: self.ambient.radius.unwrap_or(0),
            },
            other => return Err(CoarseError::Unsupported(format!("ambient kind {other}"))),
        };
        if !self.levels.is_empty() {
            let n = self.points.len();
            let mut levels = vec![Entourage::diagonal(n)];
            for pairs in &self.levels {
                levels.push(Entourage::from_pairs(
                    n,
                    pairs.iter().map(|&[a, b]| (PointId(a), PointId(b))),
                )?);
            }
            let chain = crate::space::EntourageChain::from_levels(levels)?;
            return CoarseSpace::new(self.points.clone(), chain, ambient);
        }
        match &self.metric {
            Some(dist) => CoarseSpace::from_metric(self.points.clone(), dist, &self.scales, ambient),
            None => {
                let n = self.points.len();
                let gens: Vec<Entourage> = self
                    .generators
                    .iter()
                    .map(|pairs| {
                        Entourage::from_pairs(
                            n,
                            pairs.iter().map(|&[a, b]| (PointId(a), PointId(b))),
                        )
                    })
                    .collect::<Result<_>>()?;
                let depth = self.depth.unwrap_or(self.generators.len().max(1));
                let chain = normalize_chain(&gens, depth)?;
                CoarseSpace::new(self.points.clone(), chain, ambient)
            }
        }
    }

    pub fn from_space(space: &CoarseSpace) -> SpaceJson {
        let levels: Vec<Vec<[u32; 2]>> = space
            .chain()
            .levels()
            .iter()
            .skip(1)
            .map(|e| e.iter().map(|(a, b)| [a.0, b.0]).collect())
            .collect();
        let ambient = match space.ambient() {
            Ambient::Finite => AmbientJson { kind: "finite".into(), family: None, radius: None },
            Ambient::Window { family, radius } => AmbientJson {
                kind: "window".into(),
                family: Some(family.clone()),
                radius: Some(*radius),
            },
        };
        SpaceJson {
            points: space.labels().to_vec(),
            metric: None,
            generators: Vec::new(),
            levels,
            scales: Vec::new(),
            depth: Some(space.depth()),
            ambient,
        }
    }
}

/// Maps and actions: permutations are image arrays with `null` for points
/// whose image leaves the window.
#[derive(Serialize, Deserialize, Clone, Debug, Default)]
pub struct MapJson {
    #[serde(default)]
    pub assignment: Vec<usize>,
    #[serde(default)]
    pub generators: BTreeMap<String, Vec<Option<u32>>>,
    #[serde(default)]
    pub coefficient_action: BTreeMap<String, Vec<(usize, i8)>>,
}

impl MapJson {
    pub fn to_action(&self, n_points: usize) -> Result<GroupAction> {
        let mut generators = Vec::new();
        for (name, perm) in &self.generators {
            let forward: Vec<Option<PointId>> =
                perm.iter().map(|p| p.map(PointId)).collect();
            generators.push(ActionGenerator::new(name.clone(), n_points, forward)?);
        }
        let coefficient_action = self
            .coefficient_action
            .iter()
            .map(|(k, v)| (k.clone(), SignedPerm { images: v.clone() }))
            .collect();
        GroupAction::new(n_points, generators, Vec::new(), coefficient_action)
    }
}

/// One homology group in a report.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq, Eq)]
pub struct HomologyJson {
    pub degree: usize,
    pub betti: usize,
    pub torsion: Vec<u64>,
    pub stabilized_at: Option<usize>,
}

pub fn group_to_json(degree: usize, g: &GroupData, stabilized_at: Option<usize>) -> HomologyJson {
    HomologyJson {
        degree,
        betti: g.betti(),
        torsion: g
            .torsion()
            .iter()
            .map(|t| u64::try_from(t).unwrap_or(u64::MAX))
            .collect(),
        stabilized_at,
    }
}

pub fn homology_csv(rows: &[HomologyJson]) -> String {
    let mut out = String::from("degree,betti,torsion,stabilized_at\n");
    for r in rows {
        let tors = r
            .torsion
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(";");
        let stab = r.stabilized_at.map_or("null".to_string(), |s| s.to_string());
        out.push_str(&format!("{},{},{},{}\n", r.degree, r.betti, tors, stab));
    }
    out
}

/// Schedules keyed by point label.
pub fn schedule_json(space: &CoarseSpace, s: &SubdivisionSchedule) -> serde_json::Value {
    let map: BTreeMap<String, Vec<usize>> = space
        .points()
        .map(|p| (space.label(p).to_string(), s.per_point[p.idx()].clone()))
        .collect();
    serde_json::json!(map)
}

/// Neighborhood families keyed by point label.
pub fn family_json(space: &CoarseSpace, u: &NeighborhoodFamily) -> serde_json::Value {
    let map: BTreeMap<String, Vec<(usize, usize)>> = space
        .points()
        .map(|p| (space.label(p).to_string(), u.at(p).iter().copied().collect()))
        .collect();
    serde_json::json!(map)
}

/// Simplex lists keyed by dimension.
pub fn simplices_json(space: &CoarseSpace, cx: &SimplicialComplex) -> serde_json::Value {
    let dims: Vec<Vec<Vec<String>>> = cx
        .dims
        .iter()
        .map(|list| {
            list.iter()
                .map(|s| s.iter().map(|&v| space.label(v).to_string()).collect())
                .collect()
        })
        .collect();
    serde_json::json!({ "dims": dims })
}

fn ring_name(r: Ring) -> String {
    match r {
        Ring::Z => "Z".into(),
        Ring::Q => "Q".into(),
        Ring::Fp(p) => format!("Z{p}"),
    }
}

pub fn parse_ring(s: &str) -> Result<Ring> {
    match s {
        "Z" => Ok(Ring::Z),
        "Q" => Ok(Ring::Q),
        other => {
            let p: u64 = other
                .strip_prefix("Z/")
                .or_else(|| other.strip_prefix('Z'))
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| CoarseError::Unsupported(format!("ring {other}")))?;
            Ok(Ring::Fp(p))
        }
    }
}

/// Matrix-market body of one differential.
pub fn matrix_market(cx: &GradedComplex, degree: usize) -> String {
    let m = cx.boundary_out(degree);
    let mut entries = Vec::new();
    for i in 0..m.rows {
        for j in 0..m.cols {
            let v = m.get(i, j);
            if !num_traits::Zero::is_zero(v) {
                entries.push(format!("{} {} {}", i + 1, j + 1, v));
            }
        }
    }
    let mut out = String::from("%%MatrixMarket matrix coordinate integer general\n");
    out.push_str(&format!("{} {} {}\n", m.rows, m.cols, entries.len()));
    for e in entries {
        out.push_str(&e);
        out.push('\n');
    }
    out
}

/// Manifest of an assembled complex: ring, variant shape, bases per degree.
pub fn complex_manifest(space: &CoarseSpace, cx: &GradedComplex) -> serde_json::Value {
    let degrees: Vec<serde_json::Value> = cx
        .degrees
        .iter()
        .map(|d| {
            let tuples: Option<Vec<Vec<String>>> = d.tuples.as_ref().map(|ts| {
                ts.iter()
                    .map(|t| t.iter().map(|&v| space.label(v).to_string()).collect())
                    .collect()
            });
            serde_json::json!({ "dim": d.dim, "tuples": tuples })
        })
        .collect();
    serde_json::json!({
        "ring": ring_name(cx.ring),
        "kind": match cx.kind { crate::complexes::ComplexKind::Chain => "chain", _ => "cochain" },
        "level": cx.level,
        "coefficient_rank": cx.coeff_rank,
        "degrees": degrees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::tests::line;

    #[test]
    fn space_roundtrip_through_json() {
        let s = line(-3, 3, &[0.0, 1.0, 2.0]);
        let j = SpaceJson::from_space(&s);
        let text = serde_json::to_string(&j).unwrap();
        let back: SpaceJson = serde_json::from_str(&text).unwrap();
        let s2 = back.to_space().unwrap();
        assert_eq!(s2.labels(), s.labels());
        // regenerated chain from generator lists matches the original levels
        for lvl in 0..=s.depth() {
            assert_eq!(s2.chain().level(lvl), s.chain().level(lvl), "level {lvl}");
        }
    }

    #[test]
    fn generator_presentation_normalizes() {
        let text = r#"{
            "points": ["a", "b", "c"],
            "generators": [[[0,1]], [[1,2]]],
            "depth": 2,
            "ambient": {"kind": "finite"}
        }"#;
        let j: SpaceJson = serde_json::from_str(text).unwrap();
        let s = j.to_space().unwrap();
        assert!(s.chain().is_normalized());
        assert!(s.chain().level(2).contains(PointId(0), PointId(2)));
    }

    #[test]
    fn metric_space_from_json() {
        let text = r#"{
            "points": ["0", "1", "2"],
            "metric": [[0,1,2],[1,0,1],[2,1,0]],
            "scales": [0, 1],
            "ambient": {"kind": "finite"}
        }"#;
        let j: SpaceJson = serde_json::from_str(text).unwrap();
        let s = j.to_space().unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.depth(), 1);
        assert!(s.chain().level(1).contains(PointId(0), PointId(1)));
        assert!(!s.chain().level(1).contains(PointId(0), PointId(2)));
    }

    #[test]
    fn ring_names_parse() {
        assert_eq!(parse_ring("Z").unwrap(), Ring::Z);
        assert_eq!(parse_ring("Q").unwrap(), Ring::Q);
        assert_eq!(parse_ring("Z5").unwrap(), Ring::Fp(5));
        assert_eq!(parse_ring("Z/7").unwrap(), Ring::Fp(7));
        assert!(parse_ring("R").is_err());
    }

    #[test]
    fn csv_summary_shape() {
        let rows = vec![
            HomologyJson { degree: 0, betti: 1, torsion: vec![], stabilized_at: Some(0) },
            HomologyJson { degree: 1, betti: 1, torsion: vec![2], stabilized_at: None },
        ];
        let csv = homology_csv(&rows);
        assert!(csv.contains("0,1,,0"));
        assert!(csv.contains("1,1,2,null"));
    }

    #[test]
    fn matrix_market_header() {
        let s = line(0, 2, &[0.0, 1.0]);
        let coeffs = crate::complexes::CoefficientModule::trivial(Ring::Z).unwrap();
        let cx = crate::complexes::assemble(&crate::complexes::AssembleSpec::plain(
            &s,
            1,
            1,
            &coeffs,
            crate::complexes::ComplexKind::Chain,
        ))
        .unwrap();
        let mm = matrix_market(&cx, 1);
        assert!(mm.starts_with("%%MatrixMarket matrix coordinate integer general"));
        let manifest = complex_manifest(&s, &cx);
        assert_eq!(manifest["ring"], "Z");
    }
}
