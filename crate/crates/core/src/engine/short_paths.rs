//! Maximum family of short correct index paths, the two auxiliary
//! incorrect-path collections, their coloring, and the length gate the long
//! phase relies on.

use std::collections::BTreeMap;
use std::collections::VecDeque;

use super::coloring::{Color, Coloring};
use super::families::FamilyLedger;
use super::safety::{safety_closure, ClosureRequest};
use super::{ClaimLog, Parameters, PipelineError, Thresholds};
use crate::connectivity::PathWitness;
use crate::digraph::{Digraph, Vertex, VertexSet};

const PHASE: &str = "short-paths";

/// Parity table for an index path: the first third of the index range is
/// unconstrained, the middle third must be odd, the last third even
/// (lengths are vertex counts).
pub fn correct_parity(i1: usize, k: usize, len: usize) -> bool {
    if i1 <= 2 * k {
        true
    } else if i1 <= 4 * k {
        len % 2 == 1
    } else {
        len.is_multiple_of(2)
    }
}

pub struct ShortPhaseOutput {
    pub family: BTreeMap<usize, PathWitness>,
    pub incorrect_multi: BTreeMap<usize, Vec<PathWitness>>,
    pub incorrect_single: BTreeMap<usize, PathWitness>,
    pub leftover: Vec<usize>,
}

fn budget_error() -> PipelineError {
    PipelineError::new(PHASE, "search-budget", "path enumeration budget exhausted")
}

/// Arc-count distance towards `to` through vertices passing `free`.
fn dist_to_target(d: &Digraph, to: Vertex, free: &impl Fn(Vertex) -> bool) -> Vec<usize> {
    let n = d.vertex_count();
    let mut dist = vec![usize::MAX; n];
    dist[to] = 0;
    let mut queue = VecDeque::from([to]);
    while let Some(u) = queue.pop_front() {
        if u != to && !free(u) {
            continue;
        }
        for &w in d.in_list(u) {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Shortest-first lexicographic enumeration of paths `from -> to` whose
/// interiors pass `free`; hands each candidate to `take` until it accepts.
#[allow(clippy::too_many_arguments)]
fn enumerate_paths(
    d: &Digraph,
    from: Vertex,
    to: Vertex,
    min_len: usize,
    max_len: usize,
    parity: Option<usize>,
    budget: &mut u64,
    free: &impl Fn(Vertex) -> bool,
    take: &mut impl FnMut(&[Vertex]) -> bool,
) -> Result<bool, PipelineError> {
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        d: &Digraph,
        to: Vertex,
        target_len: usize,
        path: &mut Vec<Vertex>,
        dist: &[usize],
        budget: &mut u64,
        free: &impl Fn(Vertex) -> bool,
        take: &mut impl FnMut(&[Vertex]) -> bool,
    ) -> Result<bool, PipelineError> {
        if *budget == 0 {
            return Err(budget_error());
        }
        *budget -= 1;
        let cur = *path.last().unwrap();
        if path.len() + 1 == target_len {
            if d.has_arc(cur, to) {
                path.push(to);
                let accepted = take(path);
                path.pop();
                return Ok(accepted);
            }
            return Ok(false);
        }
        let remaining = target_len - path.len() - 1;
        for idx in 0..d.out_list(cur).len() {
            let w = d.out_list(cur)[idx];
            if w == to || !free(w) || path.contains(&w) {
                continue;
            }
            if dist[w] == usize::MAX || dist[w] > remaining {
                continue;
            }
            path.push(w);
            let done = dfs(d, to, target_len, path, dist, budget, free, take)?;
            path.pop();
            if done {
                return Ok(true);
            }
        }
        Ok(false)
    }

    for len in min_len..=max_len {
        if let Some(par) = parity {
            if len % 2 != par {
                continue;
            }
        }
        let dist = dist_to_target(d, to, free);
        if dist[from] == usize::MAX {
            return Ok(false);
        }
        if dist[from] + 1 > len {
            continue;
        }
        let mut path = vec![from];
        if dfs(d, to, len, &mut path, &dist, budget, free, take)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Branch-and-bound for the maximum disjoint family: for each index, try
/// candidate paths shortest-first, then the skip branch. Exact while the
/// node budget holds; budget exhaustion aborts the phase.
struct FamilySearch<'a> {
    d: &'a Digraph,
    ledger: &'a FamilyLedger,
    k: usize,
    cap: usize,
    colored: Vec<bool>,
    used: Vec<bool>,
    budget: u64,
    best: BTreeMap<usize, PathWitness>,
    cur: BTreeMap<usize, PathWitness>,
}

impl FamilySearch<'_> {
    fn free(&self, v: Vertex) -> bool {
        !self.colored[v] && !self.used[v]
    }

    fn place_index(&mut self, pos: usize) -> Result<bool, PipelineError> {
        let total = 6 * self.k;
        if self.cur.len() + (total - pos) <= self.best.len() {
            return Ok(false);
        }
        if pos == total {
            if self.cur.len() > self.best.len() {
                self.best = self.cur.clone();
            }
            return Ok(self.best.len() == total);
        }
        let i1 = pos + 1;
        let from = self.ledger.b(i1);
        let to = self.ledger.a(i1);
        let lens: Vec<usize> = (2..=self.cap)
            .filter(|&len| correct_parity(i1, self.k, len))
            .collect();
        for len in lens {
            let dist = dist_to_target(self.d, to, &|v| self.free(v));
            if dist[from] == usize::MAX {
                break;
            }
            if dist[from] + 1 > len {
                continue;
            }
            let mut path = vec![from];
            if self.extend(pos, i1, to, len, &mut path, &dist)? {
                return Ok(true);
            }
        }
        self.place_index(pos + 1)
    }

    fn extend(
        &mut self,
        pos: usize,
        i1: usize,
        to: Vertex,
        target_len: usize,
        path: &mut Vec<Vertex>,
        dist: &[usize],
    ) -> Result<bool, PipelineError> {
        if self.budget == 0 {
            return Err(budget_error());
        }
        self.budget -= 1;
        let cur = *path.last().unwrap();
        if path.len() + 1 == target_len {
            if !self.d.has_arc(cur, to) {
                return Ok(false);
            }
            path.push(to);
            let witness = PathWitness::new(path.clone());
            for &v in witness.interior() {
                self.used[v] = true;
            }
            self.cur.insert(i1, witness.clone());
            let done = self.place_index(pos + 1);
            self.cur.remove(&i1);
            for &v in witness.interior() {
                self.used[v] = false;
            }
            path.pop();
            return done;
        }
        let remaining = target_len - path.len() - 1;
        for idx in 0..self.d.out_list(cur).len() {
            let w = self.d.out_list(cur)[idx];
            if w == to || !self.free(w) || path.contains(&w) {
                continue;
            }
            if dist[w] == usize::MAX || dist[w] > remaining {
                continue;
            }
            path.push(w);
            let done = self.extend(pos, i1, to, target_len, path, dist)?;
            path.pop();
            if done {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

pub fn short_path_phase(
    d: &Digraph,
    params: &Parameters,
    th: &Thresholds,
    ledger: &FamilyLedger,
    coloring: &mut Coloring,
    log: &mut ClaimLog,
) -> Result<ShortPhaseOutput, PipelineError> {
    let (k, l) = (params.k, params.l);
    let n = d.vertex_count();
    let c1_set = coloring.colored_set();

    let mut search = FamilySearch {
        d,
        ledger,
        k,
        cap: th.short_cap,
        colored: (0..n).map(|v| coloring.is_colored(v)).collect(),
        used: vec![false; n],
        budget: params.search_budget,
        best: BTreeMap::new(),
        cur: BTreeMap::new(),
    };
    search.place_index(0)?;
    let family = search.best;
    let mut used: VertexSet = family
        .values()
        .flat_map(|p| p.interior().iter().copied())
        .collect();
    let leftover: Vec<usize> = (1..=6 * k).filter(|i1| !family.contains_key(i1)).collect();

    // first auxiliary collection: very short incorrect paths per leftover
    // index; more than l + 1 of them refutes the family's maximality
    let mut budget = params.search_budget;
    let mut incorrect_multi: BTreeMap<usize, Vec<PathWitness>> = BTreeMap::new();
    for &i1 in &leftover {
        let mut collected: Vec<PathWitness> = Vec::new();
        loop {
            let mut taken: Option<PathWitness> = None;
            {
                let used_ref = &used;
                let free = |v: Vertex| !coloring.is_colored(v) && !used_ref.contains(&v);
                enumerate_paths(
                    d,
                    ledger.b(i1),
                    ledger.a(i1),
                    2,
                    2 * l + 2,
                    None,
                    &mut budget,
                    &free,
                    &mut |path: &[Vertex]| {
                        if correct_parity(i1, k, path.len()) {
                            return false;
                        }
                        taken = Some(PathWitness::new(path.to_vec()));
                        true
                    },
                )?;
            }
            match taken {
                Some(p) => {
                    used.extend(p.interior().iter().copied());
                    collected.push(p);
                }
                None => break,
            }
        }
        log.gate(
            PHASE,
            "C3a",
            (l + 1) as f64,
            collected.len() as f64,
            format!("index {i1} admits {} very short incorrect paths", collected.len()),
        )?;
        if !collected.is_empty() {
            incorrect_multi.insert(i1, collected);
        }
    }
    let p_multi_interior: usize = incorrect_multi
        .values()
        .flatten()
        .map(|p| p.interior().len())
        .sum();
    log.note(
        "C3.P'int",
        params.scale.apply(16.0 * (k * l * l) as f64).max(1.0),
        p_multi_interior as f64,
    );

    // second auxiliary collection: at most one mid-length incorrect path
    // per leftover index; two disjoint ones refute maximality, and a fresh
    // correct one is an outright search bug
    let mut incorrect_single: BTreeMap<usize, PathWitness> = BTreeMap::new();
    for &i1 in &leftover {
        let mut found: Vec<PathWitness> = Vec::new();
        for _attempt in 0..2 {
            let mut taken: Option<PathWitness> = None;
            let mut contradiction = false;
            {
                let used_ref = &used;
                let prior = found.clone();
                let free = |v: Vertex| {
                    !coloring.is_colored(v)
                        && !used_ref.contains(&v)
                        && !prior.iter().any(|p| p.interior().contains(&v))
                };
                enumerate_paths(
                    d,
                    ledger.b(i1),
                    ledger.a(i1),
                    2,
                    th.single_cap,
                    None,
                    &mut budget,
                    &free,
                    &mut |path: &[Vertex]| {
                        if correct_parity(i1, k, path.len()) {
                            contradiction = true;
                            return true;
                        }
                        taken = Some(PathWitness::new(path.to_vec()));
                        true
                    },
                )?;
            }
            if contradiction {
                return Err(PipelineError::new(
                    PHASE,
                    "C3-max",
                    format!("index {i1} still admits a fresh short correct path"),
                ));
            }
            match taken {
                Some(p) => found.push(p),
                None => break,
            }
        }
        log.gate(
            PHASE,
            "C3b",
            1.0,
            found.len() as f64,
            format!("index {i1} admits two disjoint mid-length incorrect paths"),
        )?;
        if let Some(p) = found.into_iter().next() {
            used.extend(p.interior().iter().copied());
            incorrect_single.insert(i1, p);
        }
    }

    // color the family per index class and the auxiliaries with the first
    // color; alternation is pinned by the already-colored endpoints
    for (&i1, path) in &family {
        color_index_path(coloring, k, i1, path, PHASE)?;
    }
    for p in incorrect_multi
        .values()
        .flatten()
        .chain(incorrect_single.values())
    {
        for &v in p.interior() {
            coloring.set(PHASE, v, Color::I)?;
        }
    }

    // certify everything colored in this phase
    let newly: VertexSet = coloring
        .colored_set()
        .difference(&c1_set)
        .copied()
        .collect();
    let w_i: VertexSet = newly
        .iter()
        .copied()
        .filter(|&v| coloring.color_of(v) == Some(Color::I))
        .collect();
    let w_ii: VertexSet = newly
        .iter()
        .copied()
        .filter(|&v| coloring.color_of(v) == Some(Color::II))
        .collect();
    let l_prime = (7300.0 * params.f() + 16.0 * (k * l * l) as f64).ceil() as usize;
    safety_closure(
        d,
        params,
        coloring,
        log,
        ClosureRequest {
            phase: PHASE,
            c_avoid: &c1_set,
            w_i: &w_i,
            w_ii: &w_ii,
            l_prime,
        },
    )?;
    log.note(
        "C3.C2",
        params.scale.apply(25000.0 * (k + l) as f64 * params.f()).max(1.0),
        coloring.colored_count() as f64,
    );

    // the length gate the long phase relies on: with everything colored so
    // far excluded, no leftover index may still have a shortish path
    for &i1 in &leftover {
        if let Some(len) = shortest_fresh_path_len(d, coloring, ledger.b(i1), ledger.a(i1)) {
            log.gate_ge(
                PHASE,
                "C3ii",
                (th.single_cap + 1) as f64,
                len as f64,
                format!("index {i1} still has a fresh path of length {len}"),
            )?;
        }
    }

    Ok(ShortPhaseOutput {
        family,
        incorrect_multi,
        incorrect_single,
        leftover,
    })
}

/// Colors the interior of a placed index path: one color for the first two
/// index classes, endpoint-consistent alternation for the rest.
pub fn color_index_path(
    coloring: &mut Coloring,
    k: usize,
    i1: usize,
    path: &PathWitness,
    phase: &'static str,
) -> Result<(), PipelineError> {
    let b_color = coloring.color_of(path.first()).ok_or_else(|| {
        PipelineError::new(phase, "path-endpoints", format!("tail {} uncolored", path.first()))
    })?;
    let a_color = coloring.color_of(path.last()).ok_or_else(|| {
        PipelineError::new(phase, "path-endpoints", format!("head {} uncolored", path.last()))
    })?;
    if i1 <= 2 * k {
        let expect = if i1 <= k { Color::I } else { Color::II };
        if b_color != expect || a_color != expect {
            return Err(PipelineError::new(
                phase,
                "path-endpoints",
                format!("index {i1} endpoints not colored {}", expect.as_str()),
            ));
        }
        for &v in path.interior() {
            coloring.set(phase, v, expect)?;
        }
    } else {
        let len = path.length();
        let tail_parity_color = if len % 2 == 1 { b_color } else { b_color.other() };
        if tail_parity_color != a_color {
            return Err(PipelineError::new(
                phase,
                "path-parity",
                format!("index {i1} alternation clashes with endpoint colors"),
            ));
        }
        for (t, &v) in path.vertices.iter().enumerate().skip(1) {
            if t == len - 1 {
                break;
            }
            let color = if t % 2 == 0 { b_color } else { b_color.other() };
            coloring.set(phase, v, color)?;
        }
    }
    Ok(())
}

/// Shortest path length between two terminals whose interior avoids every
/// colored vertex.
pub fn shortest_fresh_path_len(
    d: &Digraph,
    coloring: &Coloring,
    from: Vertex,
    to: Vertex,
) -> Option<usize> {
    let n = d.vertex_count();
    let mut dist = vec![usize::MAX; n];
    dist[from] = 1;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &w in d.out_list(u) {
            if w == to {
                return Some(dist[u] + 1);
            }
            if dist[w] == usize::MAX && !coloring.is_colored(w) {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_table() {
        let k = 1;
        assert!(correct_parity(1, k, 2) && correct_parity(2, k, 5));
        assert!(correct_parity(3, k, 3) && !correct_parity(3, k, 4));
        assert!(correct_parity(4, k, 5) && !correct_parity(4, k, 2));
        assert!(correct_parity(5, k, 2) && !correct_parity(5, k, 3));
        assert!(correct_parity(6, k, 4) && !correct_parity(6, k, 5));
    }

    #[test]
    fn alternation_requires_consistent_endpoints() {
        let mut coloring = Coloring::new(6);
        coloring.set("t", 0, Color::I).unwrap();
        coloring.set("t", 3, Color::I).unwrap();
        // odd length, same endpoint colors: fine for the odd class
        let p = PathWitness::new(vec![0, 1, 3]);
        color_index_path(&mut coloring, 1, 3, &p, "t").unwrap();
        assert_eq!(coloring.color_of(1), Some(Color::II));

        // even length with equal endpoint colors clashes
        let mut coloring = Coloring::new(6);
        coloring.set("t", 0, Color::I).unwrap();
        coloring.set("t", 3, Color::I).unwrap();
        let p = PathWitness::new(vec![0, 1, 2, 3]);
        let err = color_index_path(&mut coloring, 1, 5, &p, "t").unwrap_err();
        assert_eq!(err.claim, "path-parity");
    }

    #[test]
    fn enumeration_is_shortest_first() {
        let d = Digraph::complete(5);
        let mut seen: Vec<Vec<Vertex>> = Vec::new();
        let mut budget = 10_000u64;
        enumerate_paths(
            &d,
            0,
            1,
            2,
            3,
            None,
            &mut budget,
            &|_| true,
            &mut |p: &[Vertex]| {
                seen.push(p.to_vec());
                seen.len() == 3
            },
        )
        .unwrap();
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2, 1], vec![0, 3, 1]]);
    }
}
