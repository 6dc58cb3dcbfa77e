//! Brute-force reference implementations used to cross-check the flow-based
//! queries. Everything here enumerates deletion sets directly, so it is only
//! usable at small n and is deliberately independent of the flow code.

use crate::digraph::{Digraph, Vertex, VertexSet};

use super::is_strongly_connected;

/// Calls `f` for every subset of `0..n` with at most `max_size` elements
/// (including the empty set), in lexicographic order. Stops early when `f`
/// returns false and reports whether all subsets passed.
pub fn for_each_subset_upto(n: usize, max_size: usize, mut f: impl FnMut(&[Vertex]) -> bool) -> bool {
    fn rec(
        start: usize,
        n: usize,
        left: usize,
        current: &mut Vec<Vertex>,
        f: &mut impl FnMut(&[Vertex]) -> bool,
    ) -> bool {
        if !f(current) {
            return false;
        }
        if left == 0 {
            return true;
        }
        for v in start..n {
            current.push(v);
            let ok = rec(v + 1, n, left - 1, current, f);
            current.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    let mut current = Vec::new();
    rec(0, n, max_size, &mut current, &mut f)
}

fn delete(d: &Digraph, remove: &[Vertex]) -> Option<Digraph> {
    let n = d.vertex_count();
    let keep: VertexSet = (0..n).filter(|v| !remove.contains(v)).collect();
    if keep.is_empty() {
        return None;
    }
    Some(d.induced(&keep).unwrap().graph)
}

/// Deletion-oracle definition of strong k-connectivity.
pub fn is_strongly_k_connected_bruteforce(d: &Digraph, k: usize) -> bool {
    assert!(k >= 1);
    if d.vertex_count() < k + 1 {
        return false;
    }
    for_each_subset_upto(d.vertex_count(), k - 1, |remove| match delete(d, remove) {
        Some(rest) => is_strongly_connected(&rest),
        None => true,
    })
}

fn reaches_target(d: &Digraph, v: Vertex, removed: &[Vertex], targets: &VertexSet) -> bool {
    let n = d.vertex_count();
    let mut seen = vec![false; n];
    let mut queue = vec![v];
    seen[v] = true;
    let hit = |u: Vertex| targets.contains(&u) && !removed.contains(&u);
    if hit(v) {
        return true;
    }
    while let Some(u) = queue.pop() {
        for &w in d.out_list(u) {
            if !seen[w] && !removed.contains(&w) {
                if hit(w) {
                    return true;
                }
                seen[w] = true;
                queue.push(w);
            }
        }
    }
    false
}

/// Deletion-oracle form of (v, U) k-connectedness.
pub fn pair_k_connected_from_bruteforce(d: &Digraph, v: Vertex, u_set: &VertexSet, k: usize) -> bool {
    assert!(k >= 1);
    let n = d.vertex_count();
    if u_set.contains(&v) {
        return true;
    }
    let targets: VertexSet = u_set.iter().copied().filter(|&t| t < n).collect();
    for_each_subset_upto(n, k - 1, |remove| {
        if remove.contains(&v) {
            return true;
        }
        reaches_target(d, v, remove, &targets)
    })
}

/// Deletion-oracle form of (U, v) k-connectedness.
pub fn pair_k_connected_to_bruteforce(d: &Digraph, u_set: &VertexSet, v: Vertex, k: usize) -> bool {
    pair_k_connected_from_bruteforce(&d.reverse(), v, u_set, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_enumeration_counts() {
        let mut count = 0;
        for_each_subset_upto(4, 2, |_| {
            count += 1;
            true
        });
        // 1 empty + 4 singletons + 6 pairs
        assert_eq!(count, 11);
    }

    #[test]
    fn bruteforce_on_known_graphs() {
        assert!(is_strongly_k_connected_bruteforce(&Digraph::complete(4), 3));
        assert!(!is_strongly_k_connected_bruteforce(&Digraph::complete(4), 4));
        let c4 = Digraph::new(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert!(is_strongly_k_connected_bruteforce(&c4, 1));
        assert!(!is_strongly_k_connected_bruteforce(&c4, 2));
    }
}
