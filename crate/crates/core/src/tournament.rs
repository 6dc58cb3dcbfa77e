//! Cycles in strong tournaments: Hamiltonian cycles, cycles of every
//! prescribed length through a prescribed vertex, and the two-disjoint-cycles
//! procedure driven by a verified bipartition.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::connectivity::is_strongly_connected;
use crate::digraph::{Digraph, Vertex, VertexSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TournamentError {
    #[error("input is not a tournament")]
    NotTournament,
    #[error("tournament is not strongly connected")]
    NotStrong,
    #[error("cycle length {t} outside {lo}..={hi}")]
    BadLength { t: usize, lo: usize, hi: usize },
    #[error("vertex {0} out of range (n={1})")]
    VertexOutOfRange(Vertex, usize),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("cycle extension stalled at length {0}")]
    ExtensionStalled(usize),
}

/// A directed cycle given in cyclic vertex order, rotated to start at the
/// smallest id for determinism.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleWitness {
    pub vertices: Vec<Vertex>,
}

impl CycleWitness {
    fn canonical(mut vertices: Vec<Vertex>) -> Self {
        let min_pos = vertices
            .iter()
            .enumerate()
            .min_by_key(|&(_, v)| v)
            .map(|(i, _)| i)
            .unwrap_or(0);
        vertices.rotate_left(min_pos);
        Self { vertices }
    }

    pub fn length(&self) -> usize {
        self.vertices.len()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.vertices.contains(&v)
    }

    /// Arc-by-arc revalidation, wrap-around included. Length 2 is only
    /// meaningful for digons, which tournaments do not have.
    pub fn validate(&self, d: &Digraph) -> bool {
        let m = self.vertices.len();
        if m < 2 {
            return false;
        }
        let distinct: VertexSet = self.vertices.iter().copied().collect();
        if distinct.len() != m {
            return false;
        }
        (0..m).all(|i| d.has_arc(self.vertices[i], self.vertices[(i + 1) % m]))
    }
}

fn require_strong_tournament(t: &Digraph) -> Result<(), TournamentError> {
    if !t.is_tournament() {
        return Err(TournamentError::NotTournament);
    }
    if t.vertex_count() < 3 || !is_strongly_connected(t) {
        return Err(TournamentError::NotStrong);
    }
    Ok(())
}

/// Smallest 3-cycle through `v`: an out-neighbor w1 and in-neighbor w2 of v
/// with the arc w1 -> w2, scanned in id order. Exists in every strong
/// tournament.
fn triangle_through(t: &Digraph, v: Vertex) -> Result<Vec<Vertex>, TournamentError> {
    for &w1 in t.out_list(v) {
        for &w2 in t.in_list(v) {
            if t.has_arc(w1, w2) {
                return Ok(vec![v, w1, w2]);
            }
        }
    }
    Err(TournamentError::NotStrong)
}

/// One extension step: grow the cycle by exactly one vertex while keeping
/// `keep` on it. Either absorbs an outside vertex between a dominating /
/// dominated consecutive pair, or exchanges through an in-feeding and an
/// out-feeding outside vertex, dropping one cycle vertex other than `keep`.
fn extend_cycle(t: &Digraph, cycle: &mut Vec<Vertex>, keep: Vertex) -> Result<(), TournamentError> {
    let n = t.vertex_count();
    let m = cycle.len();
    let on_cycle: Vec<bool> = {
        let mut b = vec![false; n];
        for &c in cycle.iter() {
            b[c] = true;
        }
        b
    };
    // absorb: outside vertices in id order, insertion positions in cycle order
    #[allow(clippy::needless_range_loop)]
    for w in 0..n {
        if on_cycle[w] {
            continue;
        }
        for i in 0..m {
            if t.has_arc(cycle[i], w) && t.has_arc(w, cycle[(i + 1) % m]) {
                cycle.insert(i + 1, w);
                return Ok(());
            }
        }
    }
    // no mixed outside vertex: everything outside either dominates the whole
    // cycle or is dominated by it; strongness forces an arc between the camps
    let dominated_by_cycle: Vec<Vertex> = (0..n)
        .filter(|&w| !on_cycle[w] && cycle.iter().all(|&c| t.has_arc(c, w)))
        .collect();
    let dominates_cycle: Vec<Vertex> = (0..n)
        .filter(|&w| !on_cycle[w] && cycle.iter().all(|&c| t.has_arc(w, c)))
        .collect();
    for &u in &dominated_by_cycle {
        for &w in &dominates_cycle {
            if t.has_arc(u, w) {
                for i in 0..m {
                    let dropped = cycle[(i + 1) % m];
                    if dropped == keep {
                        continue;
                    }
                    // cycle[i] -> u -> w -> cycle[i+2], dropping cycle[i+1]
                    let mut next = Vec::with_capacity(m + 1);
                    let mut pos = (i + 2) % m;
                    next.push(cycle[i]);
                    next.push(u);
                    next.push(w);
                    while pos != i {
                        next.push(cycle[pos]);
                        pos = (pos + 1) % m;
                    }
                    *cycle = next;
                    return Ok(());
                }
            }
        }
    }
    Err(TournamentError::ExtensionStalled(m))
}

/// Cycle of length exactly `t` through `v` in a strong tournament.
pub fn cycle_through_vertex(
    t: &Digraph,
    v: Vertex,
    len: usize,
) -> Result<CycleWitness, TournamentError> {
    require_strong_tournament(t)?;
    let n = t.vertex_count();
    if v >= n {
        return Err(TournamentError::VertexOutOfRange(v, n));
    }
    if len < 3 || len > n {
        return Err(TournamentError::BadLength { t: len, lo: 3, hi: n });
    }
    let mut cycle = triangle_through(t, v)?;
    while cycle.len() < len {
        extend_cycle(t, &mut cycle, v)?;
    }
    let witness = CycleWitness::canonical(cycle);
    debug_assert!(witness.validate(t) && witness.contains(v));
    Ok(witness)
}

/// Hamiltonian cycle of a strong tournament via the same extension engine.
pub fn hamiltonian_cycle(t: &Digraph) -> Result<CycleWitness, TournamentError> {
    require_strong_tournament(t)?;
    cycle_through_vertex(t, 0, t.vertex_count())
}

/// Two disjoint cycles of lengths `len` and `n - len`, the first through
/// `v`, guided by a bipartition whose three derived subgraphs have already
/// been confirmed strongly connected.
pub fn disjoint_cycles(
    t: &Digraph,
    v: Vertex,
    len: usize,
    partition: (&VertexSet, &VertexSet),
) -> Result<(CycleWitness, CycleWitness), TournamentError> {
    if !t.is_tournament() {
        return Err(TournamentError::NotTournament);
    }
    let n = t.vertex_count();
    if v >= n {
        return Err(TournamentError::VertexOutOfRange(v, n));
    }
    if len < 3 || len + 3 > n {
        return Err(TournamentError::BadLength {
            t: len,
            lo: 3,
            hi: n.saturating_sub(3),
        });
    }
    let (mut v1, mut v2) = (partition.0.clone(), partition.1.clone());
    if v1.intersection(&v2).next().is_some() {
        return Err(TournamentError::InvalidPartition("parts overlap".into()));
    }
    if v1.len() + v2.len() != n {
        return Err(TournamentError::InvalidPartition("parts do not cover the vertex set".into()));
    }
    if v2.contains(&v) {
        std::mem::swap(&mut v1, &mut v2);
    } else if !v1.contains(&v) {
        return Err(TournamentError::InvalidPartition(format!("vertex {v} in neither part")));
    }
    let check = |s: &VertexSet, what: &str| -> Result<(), TournamentError> {
        let sub = t
            .induced(s)
            .map_err(|e| TournamentError::InvalidPartition(format!("{what}: {e}")))?;
        if !is_strongly_connected(&sub.graph) {
            return Err(TournamentError::InvalidPartition(format!(
                "{what} is not strongly connected"
            )));
        }
        Ok(())
    };
    check(&v1, "first part")?;
    check(&v2, "second part")?;
    let cross = t
        .bipartite_subgraph(&v1, &v2)
        .map_err(|e| TournamentError::InvalidPartition(e.to_string()))?;
    if !is_strongly_connected(&cross.graph) {
        return Err(TournamentError::InvalidPartition(
            "crossing subgraph is not strongly connected".into(),
        ));
    }

    let cycle_in = |part: &VertexSet,
                    through: Vertex,
                    len: usize|
     -> Result<CycleWitness, TournamentError> {
        let sub = t.induced(part).unwrap();
        let local = sub.local(through).unwrap();
        let c = cycle_through_vertex(&sub.graph, local, len)?;
        Ok(CycleWitness::canonical(
            c.vertices.into_iter().map(|u| sub.parent(u)).collect(),
        ))
    };
    let rest_cycle = |taken: &CycleWitness,
                      inner_part: &VertexSet,
                      other_part: &VertexSet|
     -> Result<CycleWitness, TournamentError> {
        // leftover part vertices must feed into and out of the other side,
        // which is what keeps the remainder strong
        for &u in inner_part {
            if taken.contains(u) {
                continue;
            }
            let has_in = t.in_list(u).iter().any(|w| other_part.contains(w));
            let has_out = t.out_list(u).iter().any(|w| other_part.contains(w));
            if !has_in || !has_out {
                return Err(TournamentError::InvalidPartition(format!(
                    "leftover vertex {u} lacks a cross in- or out-neighbor"
                )));
            }
        }
        let rest: VertexSet = t.vertices().filter(|u| !taken.contains(*u)).collect();
        let sub = t.induced(&rest).unwrap();
        let c = hamiltonian_cycle(&sub.graph)?;
        Ok(CycleWitness::canonical(
            c.vertices.into_iter().map(|u| sub.parent(u)).collect(),
        ))
    };

    let (c1, c2) = if v1.len() >= len {
        let c1 = cycle_in(&v1, v, len)?;
        let c2 = rest_cycle(&c1, &v1, &v2)?;
        (c1, c2)
    } else {
        let other = *v2.iter().next().unwrap();
        let c2 = cycle_in(&v2, other, n - len)?;
        let c1 = rest_cycle(&c2, &v2, &v1)?;
        (c1, c2)
    };
    debug_assert!(c1.validate(t) && c2.validate(t));
    debug_assert!(c1.contains(v));
    debug_assert_eq!(c1.length(), len);
    debug_assert_eq!(c2.length(), n - len);
    debug_assert!(c1.vertices.iter().all(|u| !c2.contains(*u)));
    Ok((c1, c2))
}

/// Every (vertex, length) pair realized by some simple cycle, by exhaustive
/// DFS enumeration. Reference oracle for small graphs only.
pub fn enumerate_cycle_memberships(d: &Digraph, max_n: usize) -> Option<VertexLengthSet> {
    let n = d.vertex_count();
    if n > max_n {
        return None;
    }
    let mut found = VertexLengthSet::new();
    let mut stack: Vec<Vertex> = Vec::new();
    let mut on_stack = vec![false; n];
    fn dfs(
        d: &Digraph,
        root: Vertex,
        cur: Vertex,
        stack: &mut Vec<Vertex>,
        on_stack: &mut Vec<bool>,
        found: &mut VertexLengthSet,
    ) {
        for &w in d.out_list(cur) {
            if w == root {
                if stack.len() >= 2 {
                    for &u in stack.iter() {
                        found.insert((u, stack.len()));
                    }
                }
            } else if w > root && !on_stack[w] {
                stack.push(w);
                on_stack[w] = true;
                dfs(d, root, w, stack, on_stack, found);
                on_stack[w] = false;
                stack.pop();
            }
        }
    }
    for root in 0..n {
        stack.push(root);
        on_stack[root] = true;
        dfs(d, root, root, &mut stack, &mut on_stack, &mut found);
        on_stack[root] = false;
        stack.pop();
    }
    Some(found)
}

pub type VertexLengthSet = std::collections::BTreeSet<(Vertex, usize)>;
