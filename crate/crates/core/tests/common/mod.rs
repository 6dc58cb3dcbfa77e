//! Shared helpers for the integration and acceptance suites.

use dipart::digraph::{Digraph, Vertex};
use dipart::instances::SplitMix64;

/// Every tournament on `n` vertices, one per orientation bitmask.
pub fn all_tournaments(n: usize) -> impl Iterator<Item = Digraph> {
    let pairs: Vec<(Vertex, Vertex)> = (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .collect();
    let count = 1u64 << pairs.len();
    (0..count).map(move |mask| {
        let arcs: Vec<(Vertex, Vertex)> = pairs
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| if mask & (1 << i) != 0 { (u, v) } else { (v, u) })
            .collect();
        Digraph::new(n, &arcs).expect("tournament arcs are valid")
    })
}

/// Seeded digraph where every ordered pair carries an arc with probability
/// one half, independently.
pub fn random_digraph(n: usize, seed: u64) -> Digraph {
    let mut rng = SplitMix64::new(seed);
    let mut arcs = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.next_bool() {
                arcs.push((u, v));
            }
        }
    }
    Digraph::new(n, &arcs).expect("random arcs are valid")
}
