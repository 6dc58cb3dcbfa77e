//! Constructive almost-dominating sets, core sets, and reach sets.
//!
//! The two dominating-set builders follow the iterative spine construction:
//! keep adding a common in-neighbor (chosen by minimum sole in-degree) until
//! the exceptional set is below its closed-form bound, then close the spine
//! with an anchor. `core_set` stacks rounds of the halving extraction, and
//! `reach_sets` is realized by greedy growth plus full certification since
//! no construction is prescribed for it.

use thiserror::Error;

use crate::connectivity::{pair_k_connected_from, pair_k_connected_to};
use crate::digraph::{Digraph, Vertex, VertexSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DominatingError {
    #[error("hypothesis unmet: {0}")]
    HypothesisUnmet(String),
    #[error("construction stuck at {stage}: {detail}")]
    ConstructionStuck { stage: &'static str, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DominatorKind {
    Out,
    In,
}

/// Witness for an almost out- or in-dominating set with its transitive
/// spine. For `Out` the spine runs anchor -> center, for `In` it runs
/// center -> anchor; in both cases every forward pair along the spine is an
/// arc, so the spine spans a transitive tournament inside `D[set]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominatorTriple {
    pub kind: DominatorKind,
    pub set: VertexSet,
    pub anchor: Vertex,
    pub center: Vertex,
    pub exceptional: VertexSet,
    pub spine: Vec<Vertex>,
}

impl DominatorTriple {
    /// Vertices the set must dominate: everything in the working graph
    /// outside the set itself, its exceptional set, and `forbidden`.
    pub fn domination_universe(&self, d: &Digraph, forbidden: &VertexSet) -> VertexSet {
        d.vertices()
            .filter(|v| {
                !self.set.contains(v) && !self.exceptional.contains(v) && !forbidden.contains(v)
            })
            .collect()
    }
}

fn hypothesis_threshold(c: usize, l: usize) -> u128 {
    (l as u128) << (c - 1).min(100)
}

/// Exceptional-set bound in exact integer form:
/// |E| * 2^(c-2) <= degree + c(l-1) * 2^(c-2).
fn exceptional_bound_holds(e_len: usize, degree: usize, c: usize, l: usize) -> bool {
    let shift = (c - 2).min(100);
    (e_len as u128) << shift <= degree as u128 + (((c * (l - 1)) as u128) << shift)
}

/// Almost out-dominating triple around `v`: a small set whose non-anchor part
/// out-dominates everything in `D - forbidden` except a bounded exceptional
/// set. The spine grows inside the working graph only.
pub fn almost_out_dominating(
    d: &Digraph,
    v: Vertex,
    c: usize,
    l: usize,
    forbidden: &VertexSet,
) -> Result<DominatorTriple, DominatingError> {
    if c < 2 {
        return Err(DominatingError::HypothesisUnmet(format!("c must be >= 2 (got {c})")));
    }
    if l < 1 {
        return Err(DominatingError::HypothesisUnmet("l must be >= 1".into()));
    }
    let n = d.vertex_count();
    if v >= n {
        return Err(DominatingError::HypothesisUnmet(format!("vertex {v} out of range")));
    }
    if forbidden.contains(&v) {
        return Err(DominatingError::HypothesisUnmet(format!("center {v} is forbidden")));
    }
    let in_working = |u: Vertex| !forbidden.contains(&u);
    let deg_in: usize = d.in_list(v).iter().filter(|&&u| in_working(u)).count();
    if (deg_in as u128) < hypothesis_threshold(c, l) {
        return Err(DominatingError::HypothesisUnmet(format!(
            "in-degree {deg_in} of vertex {v} below 2^(c-1)*l = {}",
            hypothesis_threshold(c, l)
        )));
    }

    // spine in pick order: v = v1 first; common in-neighbor pool alongside
    let mut spine_picked: Vec<Vertex> = vec![v];
    let mut pool: VertexSet = d
        .in_list(v)
        .iter()
        .copied()
        .filter(|&u| in_working(u))
        .collect();
    // E = working vertices not out-dominated by any spine vertex, minus the spine
    let mut exceptional: VertexSet = d
        .vertices()
        .filter(|&u| in_working(u) && u != v && !d.has_arc(v, u))
        .collect();

    loop {
        if exceptional_bound_holds(exceptional.len(), deg_in, c, l) {
            let anchor = *exceptional
                .intersection(&pool)
                .next()
                .or_else(|| pool.iter().next())
                .ok_or(DominatingError::ConstructionStuck {
                    stage: "anchor",
                    detail: "common in-neighbor pool is empty".into(),
                })?;
            let mut set: VertexSet = spine_picked.iter().copied().collect();
            set.insert(anchor);
            exceptional.remove(&anchor);
            let mut spine = vec![anchor];
            spine.extend(spine_picked.iter().rev());
            return Ok(DominatorTriple {
                kind: DominatorKind::Out,
                set,
                anchor,
                center: v,
                exceptional,
                spine,
            });
        }
        if spine_picked.len() >= c - 1 {
            return Err(DominatingError::ConstructionStuck {
                stage: "bound",
                detail: format!(
                    "|E| = {} still above bound with spine at cap {c}",
                    exceptional.len()
                ),
            });
        }
        // restrict to pool vertices with an in-neighbor inside the pool,
        // then take minimum sole in-degree there, ties by id
        let pool_prime: Vec<Vertex> = pool
            .iter()
            .copied()
            .filter(|&u| d.in_list(u).iter().any(|w| pool.contains(w)))
            .collect();
        if pool_prime.is_empty() {
            return Err(DominatingError::ConstructionStuck {
                stage: "pool",
                detail: "no pool vertex has an in-neighbor inside the pool".into(),
            });
        }
        let in_prime: VertexSet = pool_prime.iter().copied().collect();
        let next = pool_prime
            .into_iter()
            .min_by_key(|&u| {
                let sole = d
                    .in_list(u)
                    .iter()
                    .filter(|&&w| in_prime.contains(&w) && !d.has_arc(u, w))
                    .count();
                (sole, u)
            })
            .unwrap();
        spine_picked.push(next);
        pool.remove(&next);
        pool.retain(|&u| d.has_arc(u, next));
        exceptional.remove(&next);
        exceptional.retain(|&u| !d.has_arc(next, u));
    }
}

/// Mirror of [`almost_out_dominating`] on the reversed graph.
pub fn almost_in_dominating(
    d: &Digraph,
    v: Vertex,
    c: usize,
    l: usize,
    forbidden: &VertexSet,
) -> Result<DominatorTriple, DominatingError> {
    let rev = d.reverse();
    let t = almost_out_dominating(&rev, v, c, l, forbidden)?;
    let mut spine = t.spine;
    spine.reverse();
    Ok(DominatorTriple {
        kind: DominatorKind::In,
        set: t.set,
        anchor: t.anchor,
        center: v,
        exceptional: t.exceptional,
        spine,
    })
}

/// Full re-validation of a triple against its contract. `c` and `l` are the
/// construction parameters, `forbidden` the working restriction.
pub fn validate_triple(
    d: &Digraph,
    t: &DominatorTriple,
    c: usize,
    l: usize,
    forbidden: &VertexSet,
) -> Result<(), String> {
    if t.set.len() < 2 || t.set.len() > c {
        return Err(format!("set size {} outside 2..={c}", t.set.len()));
    }
    if !t.set.contains(&t.anchor) || !t.set.contains(&t.center) {
        return Err("anchor or center not in set".into());
    }
    if t.spine.len() != t.set.len() || !t.spine.iter().all(|u| t.set.contains(u)) {
        return Err("spine is not an ordering of the set".into());
    }
    let (want_tail, want_head) = match t.kind {
        DominatorKind::Out => (t.anchor, t.center),
        DominatorKind::In => (t.center, t.anchor),
    };
    if t.spine[0] != want_tail || *t.spine.last().unwrap() != want_head {
        return Err("spine endpoints do not match tail/head contract".into());
    }
    for i in 0..t.spine.len() {
        for j in (i + 1)..t.spine.len() {
            if !d.has_arc(t.spine[i], t.spine[j]) {
                return Err(format!(
                    "spine arc {} -> {} missing",
                    t.spine[i], t.spine[j]
                ));
            }
        }
    }
    if t.set.intersection(&t.exceptional).next().is_some() {
        return Err("set and exceptional overlap".into());
    }
    if t.set.iter().chain(t.exceptional.iter()).any(|u| forbidden.contains(u)) {
        return Err("set or exceptional intersects forbidden".into());
    }
    let universe = t.domination_universe(d, forbidden);
    let dominators: Vec<Vertex> = t.set.iter().copied().filter(|&u| u != t.anchor).collect();
    for &u in &universe {
        let ok = match t.kind {
            DominatorKind::Out => dominators.iter().any(|&w| d.has_arc(w, u)),
            DominatorKind::In => dominators.iter().any(|&w| d.has_arc(u, w)),
        };
        if !ok {
            return Err(format!("vertex {u} not dominated"));
        }
    }
    let degree = match t.kind {
        DominatorKind::Out => d
            .in_list(t.center)
            .iter()
            .filter(|&&u| !forbidden.contains(&u))
            .count(),
        DominatorKind::In => d
            .out_list(t.center)
            .iter()
            .filter(|&&u| !forbidden.contains(&u))
            .count(),
    };
    if !exceptional_bound_holds(t.exceptional.len(), degree, c, l) {
        return Err(format!(
            "|E| = {} exceeds (1/2)^(c-2) * {degree} + c(l-1)",
            t.exceptional.len()
        ));
    }
    Ok(())
}

/// A small set every outside vertex sends and receives at least k arcs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreSet {
    pub members: VertexSet,
    pub k: usize,
    pub l: usize,
}

/// One halving round: pick the minimum sole-out-degree vertex, then keep
/// picking inside the shrinking sole-out-neighborhood until it empties.
/// Works on the subgraph induced by `working`.
fn halving_round(d: &Digraph, working: &VertexSet, reversed: bool) -> Vec<Vertex> {
    // sole out-neighborhood in the working orientation: one-way arcs from u
    let sole_nbrs = |u: Vertex, inside: &VertexSet| -> VertexSet {
        if reversed {
            d.in_list(u)
                .iter()
                .copied()
                .filter(|&w| inside.contains(&w) && !d.has_arc(u, w))
                .collect()
        } else {
            d.out_list(u)
                .iter()
                .copied()
                .filter(|&w| inside.contains(&w) && !d.has_arc(w, u))
                .collect()
        }
    };
    let first = working
        .iter()
        .copied()
        .min_by_key(|&u| (sole_nbrs(u, working).len(), u))
        .expect("round requires a nonempty working set");
    let mut picked = vec![first];
    let mut excess = sole_nbrs(first, working);
    while !excess.is_empty() {
        let next = excess
            .iter()
            .copied()
            .min_by_key(|&u| (sole_nbrs(u, &excess).len(), u))
            .unwrap();
        picked.push(next);
        let keep = sole_nbrs(next, &excess);
        excess = keep;
        excess.remove(&next);
    }
    picked
}

/// Core set: k+l rounds of in-dominating extraction followed by k+l
/// mirrored rounds on the remainder. Every vertex left outside ends up with
/// at least k out-neighbors and k in-neighbors inside, which is verified
/// exhaustively before returning.
pub fn core_set(d: &Digraph, k: usize, l: usize) -> Result<CoreSet, DominatingError> {
    if k < 1 || l < 1 {
        return Err(DominatingError::HypothesisUnmet("need k >= 1 and l >= 1".into()));
    }
    let n = d.vertex_count();
    if d.min_union_degree() + l < n {
        return Err(DominatingError::HypothesisUnmet(format!(
            "minimum union degree {} below n - l = {}",
            d.min_union_degree(),
            n - l
        )));
    }
    let mut working: VertexSet = d.vertices().collect();
    let mut members = VertexSet::new();
    for reversed in [false, true] {
        for _round in 0..(k + l) {
            if working.is_empty() {
                break;
            }
            for v in halving_round(d, &working, reversed) {
                members.insert(v);
                working.remove(&v);
            }
        }
    }
    let core = CoreSet { members, k, l };
    validate_core_set(d, &core).map_err(|detail| DominatingError::ConstructionStuck {
        stage: "core-coverage",
        detail,
    })?;
    Ok(core)
}

pub fn validate_core_set(d: &Digraph, core: &CoreSet) -> Result<(), String> {
    let n = d.vertex_count();
    if core.members.len() < n {
        let bound = 3.0 * ((core.k + core.l) as f64) * (n as f64).log2();
        if (core.members.len() as f64) > bound {
            return Err(format!(
                "|U| = {} exceeds 3(k+l)log n = {bound:.2}",
                core.members.len()
            ));
        }
    }
    for v in d.vertices() {
        if core.members.contains(&v) {
            continue;
        }
        let outs = d
            .out_list(v)
            .iter()
            .filter(|u| core.members.contains(u))
            .count();
        let ins = d
            .in_list(v)
            .iter()
            .filter(|u| core.members.contains(u))
            .count();
        if outs < core.k || ins < core.k {
            return Err(format!(
                "vertex {v} has only {outs} out / {ins} in neighbors in the core"
            ));
        }
    }
    Ok(())
}

/// Reach sets: small U and W with (v, U) and (W, v) k-connected for every v.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachSets {
    pub u_set: VertexSet,
    pub w_set: VertexSet,
}

/// How many vertices can reach `u` (including itself).
fn reach_count(d: &Digraph, u: Vertex) -> usize {
    let n = d.vertex_count();
    let mut seen = vec![false; n];
    seen[u] = true;
    let mut queue = vec![u];
    let mut count = 1;
    while let Some(w) = queue.pop() {
        for &x in d.in_list(w) {
            if !seen[x] {
                seen[x] = true;
                count += 1;
                queue.push(x);
            }
        }
    }
    count
}

fn grow_from_seed(
    d: &Digraph,
    k: usize,
    cap: usize,
    seed: VertexSet,
) -> Result<VertexSet, DominatingError> {
    let n = d.vertex_count();
    let mut set = seed;
    loop {
        let failing: Vec<Vertex> = d
            .vertices()
            .filter(|&v| !pair_k_connected_from(d, v, &set, k).unwrap().0)
            .collect();
        if failing.is_empty() {
            return Ok(set);
        }
        if set.len() >= cap.min(n) {
            return Err(DominatingError::ConstructionStuck {
                stage: "reach-growth",
                detail: format!(
                    "{} vertices still failing at size cap {cap}; best candidate {:?}",
                    failing.len(),
                    set
                ),
            });
        }
        let best = d
            .vertices()
            .filter(|v| !set.contains(v))
            .map(|cand| {
                let mut trial = set.clone();
                trial.insert(cand);
                let fixed = failing
                    .iter()
                    .filter(|&&v| pair_k_connected_from(d, v, &trial, k).unwrap().0)
                    .count();
                (fixed, cand)
            })
            .max_by_key(|&(fixed, cand)| (fixed, std::cmp::Reverse(cand)))
            .map(|(_, cand)| cand);
        match best {
            Some(cand) => {
                set.insert(cand);
            }
            None => {
                return Err(DominatingError::ConstructionStuck {
                    stage: "reach-growth",
                    detail: "candidate pool exhausted".into(),
                })
            }
        }
    }
}

fn grow_reach_set(d: &Digraph, k: usize, cap: usize) -> Result<VertexSet, DominatingError> {
    let n = d.vertex_count();
    let mut by_out: Vec<Vertex> = d.vertices().collect();
    by_out.sort_by_key(|&v| (std::cmp::Reverse(d.out_degree(v)), v));
    let degree_seed: VertexSet = by_out.into_iter().take(k.min(n)).collect();
    match grow_from_seed(d, k, cap, degree_seed) {
        Ok(set) => Ok(set),
        Err(first_err) => {
            // degree seeding can land on a source-side vertex nothing can
            // reach; reseed with the most widely reachable vertices
            let mut by_reach: Vec<Vertex> = d.vertices().collect();
            by_reach.sort_by_key(|&v| (std::cmp::Reverse(reach_count(d, v)), v));
            let reach_seed: VertexSet = by_reach.into_iter().take(k.min(n)).collect();
            grow_from_seed(d, k, cap, reach_seed).map_err(|_| first_err)
        }
    }
}

/// Greedy growth followed by full certification; certificates downstream
/// flag these sets as search-derived.
pub fn reach_sets(d: &Digraph, k: usize, l: usize) -> Result<ReachSets, DominatingError> {
    if k < 1 || l < 1 {
        return Err(DominatingError::HypothesisUnmet("need k >= 1 and l >= 1".into()));
    }
    let n = d.vertex_count();
    if d.min_union_degree() + l < n {
        return Err(DominatingError::HypothesisUnmet(format!(
            "minimum union degree {} below n - l = {}",
            d.min_union_degree(),
            n - l
        )));
    }
    let cap = 2 * k + l - 2;
    let u_set = grow_reach_set(d, k, cap.max(1))?;
    let w_set = grow_reach_set(&d.reverse(), k, cap.max(1))?;
    // never return uncertified sets
    for v in d.vertices() {
        if !pair_k_connected_from(d, v, &u_set, k).unwrap().0 {
            return Err(DominatingError::ConstructionStuck {
                stage: "reach-certify",
                detail: format!("(v={v}, U) not {k}-connected after growth"),
            });
        }
        if !pair_k_connected_to(d, &w_set, v, k).unwrap().0 {
            return Err(DominatingError::ConstructionStuck {
                stage: "reach-certify",
                detail: format!("(W, v={v}) not {k}-connected after growth"),
            });
        }
    }
    Ok(ReachSets { u_set, w_set })
}
