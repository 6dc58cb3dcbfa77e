//! Exact strong-connectivity and k-connectivity queries with certified
//! witnesses, plus the disjoint-path fan machinery.

mod fans;
mod flow;
pub mod oracle;

pub use fans::{
    find_disjoint_path_fans, find_disjoint_path_fans_with, select_short_subfamily,
    DisjointPathFan, FanError, FanOptions, FanStrategy,
};
pub use flow::{local_connectivity, source_to_set_connectivity, VertexFlowCache};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::{Digraph, Vertex, VertexSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConnectivityError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("vertex {0} out of range (n={1})")]
    VertexOutOfRange(Vertex, usize),
}

/// A directed path given by its vertex sequence. `length` is the number of
/// vertices, so an arc is a path of length 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathWitness {
    pub vertices: Vec<Vertex>,
}

impl PathWitness {
    pub fn new(vertices: Vec<Vertex>) -> Self {
        Self { vertices }
    }

    pub fn length(&self) -> usize {
        self.vertices.len()
    }

    pub fn first(&self) -> Vertex {
        self.vertices[0]
    }

    pub fn last(&self) -> Vertex {
        *self.vertices.last().unwrap()
    }

    pub fn interior(&self) -> &[Vertex] {
        if self.vertices.len() <= 2 {
            &[]
        } else {
            &self.vertices[1..self.vertices.len() - 1]
        }
    }

    pub fn validate(&self, d: &Digraph) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        let distinct: VertexSet = self.vertices.iter().copied().collect();
        if distinct.len() != self.vertices.len() {
            return false;
        }
        if self.vertices.iter().any(|&v| v >= d.vertex_count()) {
            return false;
        }
        self.vertices.windows(2).all(|w| d.has_arc(w[0], w[1]))
    }
}

/// Negative certificate: deleting `cut` leaves no path from `side_a` to
/// `side_b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatorWitness {
    pub cut: VertexSet,
    pub side_a: VertexSet,
    pub side_b: VertexSet,
}

impl SeparatorWitness {
    /// Re-validates by deletion plus reachability: no vertex of `side_a`
    /// may reach any vertex of `side_b` once `cut` is removed.
    pub fn validate(&self, d: &Digraph) -> bool {
        if self.side_a.iter().any(|v| self.cut.contains(v))
            || self.side_b.iter().any(|v| self.cut.contains(v))
        {
            return false;
        }
        let n = d.vertex_count();
        let mut seen = vec![false; n];
        let mut queue: Vec<Vertex> = Vec::new();
        for &s in &self.side_a {
            if s < n && !seen[s] {
                seen[s] = true;
                queue.push(s);
            }
        }
        while let Some(u) = queue.pop() {
            for &v in d.out_list(u) {
                if !seen[v] && !self.cut.contains(&v) {
                    seen[v] = true;
                    queue.push(v);
                }
            }
        }
        self.side_b.iter().all(|&t| t >= n || !seen[t])
    }
}

/// True iff a single strongly connected component spans the graph.
pub fn is_strongly_connected(d: &Digraph) -> bool {
    let n = d.vertex_count();
    let bfs = |forward: bool| -> usize {
        let mut seen = vec![false; n];
        let mut queue = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop() {
            let next = if forward { d.out_list(u) } else { d.in_list(u) };
            for &v in next {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push(v);
                }
            }
        }
        count
    };
    bfs(true) == n && bfs(false) == n
}

/// Exact strong k-connectivity with a separating witness on failure.
///
/// `Ok((false, None))` means the graph is simply too small (|D| <= k).
/// The pair scan fixes the first `k` vertices as probes and runs one
/// unit-capacity flow per non-adjacent pair, which is exact by Menger.
pub fn is_strongly_k_connected(
    d: &Digraph,
    k: usize,
) -> Result<(bool, Option<SeparatorWitness>), ConnectivityError> {
    if k == 0 {
        return Err(ConnectivityError::ZeroK);
    }
    let n = d.vertex_count();
    if n < k + 1 {
        return Ok((false, None));
    }
    // any minimum separator of size < k misses one of the first k vertices,
    // so scanning pairs incident to those probes is exhaustive
    let probes: Vec<Vertex> = (0..k.min(n)).collect();
    let mut tasks: Vec<(Vertex, Vertex)> = Vec::new();
    for &p in &probes {
        for u in 0..n {
            if u == p {
                continue;
            }
            if !d.has_arc(p, u) {
                tasks.push((p, u));
            }
            if !d.has_arc(u, p) {
                tasks.push((u, p));
            }
        }
    }
    let cache = flow::VertexFlowCache::new(d);
    let failure = tasks
        .par_iter()
        .enumerate()
        .map_init(
            || cache.clone(),
            |net, (idx, &(x, y))| {
                let (flow, cut) = net.local_connectivity(x, y, k as i64);
                if flow < k as i64 {
                    Some((idx, x, y, cut.unwrap()))
                } else {
                    None
                }
            },
        )
        .flatten()
        .min_by_key(|&(idx, _, _, _)| idx);
    if let Some((_, x, y, cut)) = failure {
        let witness = separator_from_cut(d, x, y, cut);
        return Ok((false, Some(witness)));
    }
    Ok((true, None))
}

fn separator_from_cut(d: &Digraph, x: Vertex, y: Vertex, cut: VertexSet) -> SeparatorWitness {
    let n = d.vertex_count();
    let mut seen = vec![false; n];
    let mut queue = vec![x];
    seen[x] = true;
    while let Some(u) = queue.pop() {
        for &v in d.out_list(u) {
            if !seen[v] && !cut.contains(&v) {
                seen[v] = true;
                queue.push(v);
            }
        }
    }
    let side_a: VertexSet = (0..n).filter(|&v| seen[v] && !cut.contains(&v)).collect();
    let mut side_b: VertexSet = (0..n)
        .filter(|&v| !seen[v] && !cut.contains(&v))
        .collect();
    side_b.insert(y);
    debug_assert!(!seen[y]);
    SeparatorWitness {
        cut,
        side_a,
        side_b,
    }
}

/// (v, U) k-connectedness: after deleting any k-1 vertices other than v,
/// some path from v into the surviving part of U remains. U may contain
/// ids outside the graph; they are ignored.
pub fn pair_k_connected_from(
    d: &Digraph,
    v: Vertex,
    u_set: &VertexSet,
    k: usize,
) -> Result<(bool, Option<SeparatorWitness>), ConnectivityError> {
    if k == 0 {
        return Err(ConnectivityError::ZeroK);
    }
    let n = d.vertex_count();
    if v >= n {
        return Err(ConnectivityError::VertexOutOfRange(v, n));
    }
    if u_set.contains(&v) {
        return Ok((true, None));
    }
    let terminals: VertexSet = u_set.iter().copied().filter(|&t| t < n).collect();
    if terminals.len() < k {
        // deleting the terminals themselves leaves nothing to reach
        let witness = SeparatorWitness {
            cut: terminals.clone(),
            side_a: VertexSet::from([v]),
            side_b: VertexSet::new(),
        };
        return Ok((false, Some(witness)));
    }
    let (flow, cut) = source_to_set_connectivity(d, v, &terminals, k as i64);
    if flow >= k as i64 {
        return Ok((true, None));
    }
    let cut = cut.unwrap();
    let side_b: VertexSet = terminals.difference(&cut).copied().collect();
    Ok((
        false,
        Some(SeparatorWitness {
            cut,
            side_a: VertexSet::from([v]),
            side_b,
        }),
    ))
}

/// (U, v) k-connectedness; the mirror of [`pair_k_connected_from`] on the
/// reversed graph.
pub fn pair_k_connected_to(
    d: &Digraph,
    u_set: &VertexSet,
    v: Vertex,
    k: usize,
) -> Result<(bool, Option<SeparatorWitness>), ConnectivityError> {
    let rev = d.reverse();
    let (ok, witness) = pair_k_connected_from(&rev, v, u_set, k)?;
    Ok((
        ok,
        witness.map(|w| SeparatorWitness {
            cut: w.cut,
            side_a: w.side_b,
            side_b: w.side_a,
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::vset;
    use crate::instances::gen_tournament;

    fn cycle(n: usize) -> Digraph {
        let arcs: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Digraph::new(n, &arcs).unwrap()
    }

    #[test]
    fn strong_connectivity_examples() {
        assert!(is_strongly_connected(&cycle(3)));
        let path = Digraph::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(!is_strongly_connected(&path));
        let two = Digraph::new(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]).unwrap();
        assert!(!is_strongly_connected(&two));
    }

    #[test]
    fn k_connectivity_examples() {
        assert_eq!(is_strongly_k_connected(&cycle(3), 0), Err(ConnectivityError::ZeroK));

        let (ok, _) = is_strongly_k_connected(&Digraph::complete(4), 3).unwrap();
        assert!(ok);

        let (ok, w) = is_strongly_k_connected(&cycle(4), 2).unwrap();
        assert!(!ok);
        let w = w.unwrap();
        assert_eq!(w.cut.len(), 1);
        assert!(w.validate(&cycle(4)));

        // |D| <= k reports no separator
        let (ok, w) = is_strongly_k_connected(&Digraph::complete(3), 3).unwrap();
        assert!(!ok && w.is_none());

        // k = 1 agrees with plain strong connectivity on n >= 2
        for seed in 0..10u64 {
            let t = gen_tournament(6, seed).unwrap();
            let (ok, _) = is_strongly_k_connected(&t, 1).unwrap();
            assert_eq!(ok, is_strongly_connected(&t));
        }
    }

    #[test]
    fn k_connectivity_matches_oracle_on_tournaments() {
        for seed in 0..40u64 {
            let t = gen_tournament(9, seed).unwrap();
            for k in 1..=2usize {
                let (fast, w) = is_strongly_k_connected(&t, k).unwrap();
                let slow = oracle::is_strongly_k_connected_bruteforce(&t, k);
                assert_eq!(fast, slow, "seed={seed} k={k}");
                if let Some(w) = w {
                    assert!(w.validate(&t));
                    assert!(w.cut.len() < k);
                }
            }
        }
    }

    #[test]
    fn pair_connectivity_examples() {
        let k5 = Digraph::complete(5);
        // v in U short-circuits
        let (ok, _) = pair_k_connected_from(&k5, 2, &vset([2, 9]), 4).unwrap();
        assert!(ok);
        let (ok, _) = pair_k_connected_from(&k5, 0, &vset([1, 2, 3]), 3).unwrap();
        assert!(ok);
        assert!(oracle::pair_k_connected_from_bruteforce(&k5, 0, &vset([1, 2, 3]), 3));

        // star: v -> {1..k}, exactly k single-arc paths
        let star = Digraph::new(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let (ok, _) = pair_k_connected_from(&star, 0, &vset([1, 2, 3]), 3).unwrap();
        assert!(ok);
        let (ok, w) = pair_k_connected_from(&star, 0, &vset([1, 2, 3]), 4).unwrap();
        assert!(!ok);
        assert!(w.unwrap().cut.len() <= 3);
    }

    #[test]
    fn pair_connectivity_matches_oracle() {
        for seed in 0..30u64 {
            let t = gen_tournament(7, seed).unwrap();
            let u = vset([0, 3]);
            for v in 0..7 {
                for k in 1..=3usize {
                    let (fast, _) = pair_k_connected_from(&t, v, &u, k).unwrap();
                    let slow = oracle::pair_k_connected_from_bruteforce(&t, v, &u, k);
                    assert_eq!(fast, slow, "seed={seed} v={v} k={k}");
                    let (fast_to, _) = pair_k_connected_to(&t, &u, v, k).unwrap();
                    let slow_to = oracle::pair_k_connected_to_bruteforce(&t, &u, v, k);
                    assert_eq!(fast_to, slow_to, "to seed={seed} v={v} k={k}");
                }
            }
        }
    }

    #[test]
    fn mirror_relation_holds() {
        let d = Digraph::new(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (1, 3)]).unwrap();
        let u = vset([0, 2]);
        for v in 0..4 {
            for k in 1..=2usize {
                let (a, _) = pair_k_connected_to(&d, &u, v, k).unwrap();
                let (b, _) = pair_k_connected_from(&d.reverse(), v, &u, k).unwrap();
                assert_eq!(a, b);
            }
        }
    }
}
