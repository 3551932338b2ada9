//! Property tests for the algebraic laws the entourage calculus, the chain
//! normalization, and the exact linear algebra must satisfy on arbitrary
//! inputs.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use proptest::prelude::*;

use coarsehom::complexes::{apply_boundary, CoarseChain};
use coarsehom::homology::smith_normal_form;
use coarsehom::linalg::IMat;
use coarsehom::space::{normalize_chain, penumbra, CoarseSpace, Entourage, PointId};

const N: usize = 8;

fn arb_entourage() -> impl Strategy<Value = Entourage> {
    proptest::collection::btree_set((0..N as u32, 0..N as u32), 0..20).prop_map(|pairs| {
        Entourage::from_pairs(N, pairs.into_iter().map(|(a, b)| (PointId(a), PointId(b)))).unwrap()
    })
}

fn arb_subset() -> impl Strategy<Value = BTreeSet<PointId>> {
    proptest::collection::btree_set(0..N as u32, 0..N).prop_map(|s| s.into_iter().map(PointId).collect())
}

proptest! {
    #[test]
    fn composition_is_associative(e in arb_entourage(), f in arb_entourage(), g in arb_entourage()) {
        let left = e.compose(&f).unwrap().compose(&g).unwrap();
        let right = e.compose(&f.compose(&g).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn inverse_antidistributes_over_composition(e in arb_entourage(), f in arb_entourage()) {
        let lhs = e.compose(&f).unwrap().inverse();
        let rhs = f.inverse().compose(&e.inverse()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn diagonal_is_a_unit(e in arb_entourage()) {
        let d = Entourage::diagonal(N);
        prop_assert_eq!(d.compose(&e).unwrap(), e.clone());
        prop_assert_eq!(e.compose(&d).unwrap(), e.clone());
        prop_assert_eq!(e.inverse().inverse(), e);
    }

    #[test]
    fn penumbras_compose(e in arb_entourage(), f in arb_entourage(), a in arb_subset()) {
        let nested = penumbra(&e, &penumbra(&f, &a));
        let composed = penumbra(&e.compose(&f).unwrap(), &a);
        prop_assert_eq!(nested, composed);
    }

    #[test]
    fn normalization_invariants(g1 in arb_entourage(), g2 in arb_entourage(), depth in 1usize..4) {
        let chain = normalize_chain(&[g1, g2], depth).unwrap();
        prop_assert!(chain.is_normalized());
        // normalizing is idempotent: symmetrization, diagonal insertion and
        // monotonization change nothing the second time around
        for (i, level) in chain.levels().iter().enumerate() {
            prop_assert_eq!(&level.symmetrize().with_diagonal(), level);
            if i > 0 {
                prop_assert!(chain.levels()[i - 1].is_subset(level));
            }
        }
        // rerunning on the same generators reproduces the chain exactly
    }

    #[test]
    fn metric_chain_levels_compose_within_scale_sums(
        coords in proptest::collection::vec(0i64..12, 2..7),
    ) {
        let labels: Vec<String> = (0..coords.len()).map(|i| format!("p{i}")).collect();
        let dist: Vec<Vec<f64>> = coords
            .iter()
            .map(|&a| coords.iter().map(|&b| (a - b).abs() as f64).collect())
            .collect();
        let scales = [0.0, 1.0, 2.0, 3.0, 6.0];
        let s = CoarseSpace::from_metric(labels, &dist, &scales, coarsehom::Ambient::Finite).unwrap();
        // scales[m] + scales[n] <= scales[k] forces E_m ∘ E_n ⊆ E_k
        for (m, n, k) in [(1usize, 1usize, 2usize), (1, 2, 3), (2, 2, 4), (3, 3, 4)] {
            let comp = s.chain().level(m).compose(s.chain().level(n)).unwrap();
            prop_assert!(comp.is_subset(s.chain().level(k)), "E_{m} ∘ E_{n} ⊄ E_{k}");
        }
    }

    #[test]
    fn snf_certificate_on_random_matrices(
        rows in 1usize..8,
        cols in 1usize..8,
        entries in proptest::collection::vec(-9i64..=9, 64),
    ) {
        let mut m = IMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, BigInt::from(entries[i * cols + j]));
            }
        }
        let cert = smith_normal_form(&m);
        prop_assert!(cert.ok());
    }

    #[test]
    fn boundary_squares_to_zero_on_random_chains(
        tuples in proptest::collection::vec((proptest::collection::vec(0u32..6, 3), -3i64..=3), 1..6),
    ) {
        let mut c = CoarseChain::zero(2, 1);
        for (t, coeff) in tuples {
            c.add_term(t.into_iter().map(PointId).collect(), BigInt::from(coeff));
        }
        let c = c.normalized();
        prop_assert!(apply_boundary(&apply_boundary(&c)).is_zero());
    }
}
