//! Property tests for the structural invariants the rest of the stack
//! leans on.

use proptest::prelude::*;

use dipart::connectivity::{
    find_disjoint_path_fans, is_strongly_connected, is_strongly_k_connected, FanError,
};
use dipart::digraph::{Digraph, Vertex, VertexSet};
use dipart::verify::graph_hash;

/// Arbitrary simple digraph on 2..=9 vertices.
fn arb_digraph() -> impl Strategy<Value = Digraph> {
    (2usize..=9)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1);
            (Just(n), proptest::collection::vec(any::<bool>(), pairs))
        })
        .prop_map(|(n, bits)| {
            let mut arcs = Vec::new();
            let mut idx = 0;
            for u in 0..n {
                for v in 0..n {
                    if u != v {
                        if bits[idx] {
                            arcs.push((u, v));
                        }
                        idx += 1;
                    }
                }
            }
            Digraph::new(n, &arcs).unwrap()
        })
}

proptest! {
    #[test]
    fn reverse_is_an_involution(d in arb_digraph()) {
        prop_assert_eq!(d.reverse().reverse(), d);
    }

    #[test]
    fn degree_profile_swaps_under_reversal(d in arb_digraph()) {
        let rev = d.reverse();
        for v in 0..d.vertex_count() {
            let (dp, dm, sp, sm, union) = d.degree_profile(v);
            let (rp, rm, rsp, rsm, runion) = rev.degree_profile(v);
            prop_assert_eq!((dp, dm, sp, sm), (rm, rp, rsm, rsp));
            prop_assert_eq!(union, runion);
        }
    }

    #[test]
    fn sole_degrees_and_union_are_consistent(d in arb_digraph()) {
        for v in 0..d.vertex_count() {
            let (dp, dm, sp, sm, union) = d.degree_profile(v);
            prop_assert!(sp <= dp && sm <= dm);
            let digons = dp - sp;
            prop_assert_eq!(digons, dm - sm);
            prop_assert_eq!(union, dp + dm - digons);
        }
    }

    #[test]
    fn subgraphs_never_invent_arcs(d in arb_digraph()) {
        let n = d.vertex_count();
        let members: VertexSet = (0..n).step_by(2).collect();
        let sub = d.induced(&members).unwrap();
        for (u, v) in sub.graph.arcs() {
            prop_assert!(d.has_arc(sub.parent(u), sub.parent(v)));
        }
        let a: VertexSet = (0..n / 2).collect();
        let b: VertexSet = (n / 2..n).collect();
        if !a.is_empty() && !b.is_empty() {
            let cross = d.bipartite_subgraph(&a, &b).unwrap();
            for (u, v) in cross.graph.arcs() {
                let (pu, pv) = (cross.parent(u), cross.parent(v));
                prop_assert!(d.has_arc(pu, pv));
                prop_assert_ne!(a.contains(&pu), a.contains(&pv));
            }
        }
    }

    #[test]
    fn one_connectivity_matches_strong_connectivity(d in arb_digraph()) {
        let (k1, _) = is_strongly_k_connected(&d, 1).unwrap();
        prop_assert_eq!(k1, is_strongly_connected(&d) && d.vertex_count() >= 2);
    }

    #[test]
    fn parse_round_trip(d in arb_digraph()) {
        prop_assert_eq!(Digraph::parse_text(&d.to_text()).unwrap(), d.clone());
        prop_assert_eq!(graph_hash(&Digraph::parse_text(&d.to_text()).unwrap()), graph_hash(&d));
    }

    #[test]
    fn fans_validate_or_fail_structurally(d in arb_digraph(), s in 1usize..=3) {
        let n = d.vertex_count();
        let pairs = [(0, n - 1)];
        let avoid = VertexSet::new();
        match find_disjoint_path_fans(&d, &pairs, s, &avoid) {
            Ok(fan) => {
                prop_assert!(fan.validate(&d, &avoid));
                // interior disjointness by direct set arithmetic
                let mut seen: VertexSet = VertexSet::new();
                for p in fan.paths.iter().flatten() {
                    for &v in p.interior() {
                        prop_assert!(seen.insert(v));
                        prop_assert!(v != 0 && v != n - 1);
                    }
                }
            }
            Err(FanError::NoSuchFan { partial }) => {
                prop_assert!(partial.paths.iter().flatten().count() < s);
            }
            Err(e) => return Err(TestCaseError::fail(format!("unexpected error {e}"))),
        }
    }
}

// the deletion oracle agrees with the flow route on every graph the
// strategy produces; a slimmer mirror of the acceptance battery
proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn menger_agreement_small(d in arb_digraph(), k in 1usize..=2) {
        use dipart::connectivity::oracle;
        let (fast, witness) = is_strongly_k_connected(&d, k).unwrap();
        prop_assert_eq!(fast, oracle::is_strongly_k_connected_bruteforce(&d, k));
        if let Some(w) = witness {
            prop_assert!(w.validate(&d));
            prop_assert!(w.cut.len() < k);
        }
    }
}

// vertex ids in every witness stay inside the graph
proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn witnesses_stay_in_range(d in arb_digraph(), k in 1usize..=3) {
        let n = d.vertex_count();
        if let (false, Some(w)) = is_strongly_k_connected(&d, k).unwrap() {
            for &v in w.cut.iter().chain(w.side_a.iter()).chain(w.side_b.iter()) {
                prop_assert!((v as Vertex) < n);
            }
        }
    }
}
