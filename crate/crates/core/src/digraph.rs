//! Immutable simple digraph and the primitive degree/subgraph queries
//! everything else is built on.
//!
//! Vertices are dense ids `0..n-1`. Loops are forbidden, digons (both
//! orientations of a pair) are allowed, and arc multiplicity is rejected
//! loudly at construction instead of being deduplicated.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

pub type Vertex = usize;

/// Ordered set of vertex ids. Deterministic iteration order matters for
/// reproducible tie-breaking everywhere, hence a `BTreeSet`.
pub type VertexSet = BTreeSet<Vertex>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DigraphError {
    #[error("graph must have at least one vertex")]
    Empty,
    #[error("loop arc ({0},{0}) is not allowed")]
    Loop(Vertex),
    #[error("duplicate arc ({0},{1})")]
    DuplicateArc(Vertex, Vertex),
    #[error("vertex {0} out of range (n={1})")]
    VertexOutOfRange(Vertex, usize),
    #[error("vertex sets must be disjoint (both contain {0})")]
    Overlap(Vertex),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Immutable simple directed graph. Adjacency is stored in both
/// directions; all queries are pure and safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    out: Vec<Vec<Vertex>>,
    inn: Vec<Vec<Vertex>>,
    m: usize,
}

impl Digraph {
    pub fn new(n: usize, arcs: &[(Vertex, Vertex)]) -> Result<Self, DigraphError> {
        if n == 0 {
            return Err(DigraphError::Empty);
        }
        let mut out = vec![Vec::new(); n];
        let mut inn = vec![Vec::new(); n];
        for &(u, v) in arcs {
            if u >= n {
                return Err(DigraphError::VertexOutOfRange(u, n));
            }
            if v >= n {
                return Err(DigraphError::VertexOutOfRange(v, n));
            }
            if u == v {
                return Err(DigraphError::Loop(u));
            }
            out[u].push(v);
        }
        for (u, row) in out.iter_mut().enumerate() {
            row.sort_unstable();
            if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                return Err(DigraphError::DuplicateArc(u, w[0]));
            }
        }
        let mut m = 0;
        for (u, row) in out.iter().enumerate() {
            m += row.len();
            for &v in row {
                inn[v].push(u);
            }
        }
        for row in inn.iter_mut() {
            row.sort_unstable();
        }
        Ok(Self { n, out, inn, m })
    }

    /// Complete digraph: every ordered pair of distinct vertices is an arc.
    pub fn complete(n: usize) -> Self {
        let mut arcs = Vec::with_capacity(n * n.saturating_sub(1));
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    arcs.push((u, v));
                }
            }
        }
        Self::new(n, &arcs).expect("complete digraph is valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.m
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        0..self.n
    }

    pub fn has_arc(&self, u: Vertex, v: Vertex) -> bool {
        self.out[u].binary_search(&v).is_ok()
    }

    pub fn adjacent(&self, u: Vertex, v: Vertex) -> bool {
        self.has_arc(u, v) || self.has_arc(v, u)
    }

    pub fn out_list(&self, v: Vertex) -> &[Vertex] {
        &self.out[v]
    }

    pub fn in_list(&self, v: Vertex) -> &[Vertex] {
        &self.inn[v]
    }

    pub fn out_neighbors(&self, v: Vertex) -> VertexSet {
        assert!(v < self.n, "vertex {v} out of range");
        self.out[v].iter().copied().collect()
    }

    pub fn in_neighbors(&self, v: Vertex) -> VertexSet {
        assert!(v < self.n, "vertex {v} out of range");
        self.inn[v].iter().copied().collect()
    }

    pub fn out_degree(&self, v: Vertex) -> usize {
        self.out[v].len()
    }

    pub fn in_degree(&self, v: Vertex) -> usize {
        self.inn[v].len()
    }

    /// Out-neighbors that are not simultaneously in-neighbors.
    pub fn sole_out_degree(&self, v: Vertex) -> usize {
        self.out[v].iter().filter(|&&u| !self.has_arc(u, v)).count()
    }

    /// In-neighbors that are not simultaneously out-neighbors.
    pub fn sole_in_degree(&self, v: Vertex) -> usize {
        self.inn[v].iter().filter(|&&u| !self.has_arc(v, u)).count()
    }

    /// `(d+, d-, sole d+, sole d-, |N+ ∪ N-|)`.
    pub fn degree_profile(&self, v: Vertex) -> (usize, usize, usize, usize, usize) {
        assert!(v < self.n, "vertex {v} out of range");
        let dp = self.out_degree(v);
        let dm = self.in_degree(v);
        let sp = self.sole_out_degree(v);
        let sm = self.sole_in_degree(v);
        // every non-sole out-neighbor is a digon partner counted once in the union
        let digons = dp - sp;
        (dp, dm, sp, sm, dp + dm - digons)
    }

    pub fn union_degree(&self, v: Vertex) -> usize {
        self.degree_profile(v).4
    }

    /// Minimum over all vertices of `|N+(v) ∪ N-(v)|`.
    pub fn min_union_degree(&self) -> usize {
        (0..self.n).map(|v| self.union_degree(v)).min().unwrap()
    }

    pub fn arcs(&self) -> Vec<(Vertex, Vertex)> {
        let mut a = Vec::with_capacity(self.m);
        for u in 0..self.n {
            for &v in &self.out[u] {
                a.push((u, v));
            }
        }
        a
    }

    /// Arc-reversed graph; an involution.
    pub fn reverse(&self) -> Digraph {
        Digraph {
            n: self.n,
            out: self.inn.clone(),
            inn: self.out.clone(),
            m: self.m,
        }
    }

    /// Induced subgraph on `members`, relabeled to `0..|members|-1` with the
    /// id map back to the parent retained.
    pub fn induced(&self, members: &VertexSet) -> Result<SubDigraph, DigraphError> {
        self.restricted(members, |_, _| true)
    }

    /// Subgraph on `a ∪ b` keeping only arcs that cross between `a` and `b`.
    pub fn bipartite_subgraph(
        &self,
        a: &VertexSet,
        b: &VertexSet,
    ) -> Result<SubDigraph, DigraphError> {
        if let Some(&x) = a.intersection(b).next() {
            return Err(DigraphError::Overlap(x));
        }
        let mut side = vec![0u8; self.n];
        for &v in a {
            if v >= self.n {
                return Err(DigraphError::VertexOutOfRange(v, self.n));
            }
            side[v] = 1;
        }
        for &v in b {
            if v >= self.n {
                return Err(DigraphError::VertexOutOfRange(v, self.n));
            }
            side[v] = 2;
        }
        let members: VertexSet = a.union(b).copied().collect();
        self.restricted(&members, |u, v| side[u] != side[v])
    }

    fn restricted(
        &self,
        members: &VertexSet,
        keep: impl Fn(Vertex, Vertex) -> bool,
    ) -> Result<SubDigraph, DigraphError> {
        if members.is_empty() {
            return Err(DigraphError::Empty);
        }
        let to_parent: Vec<Vertex> = members.iter().copied().collect();
        if let Some(&v) = to_parent.iter().find(|&&v| v >= self.n) {
            return Err(DigraphError::VertexOutOfRange(v, self.n));
        }
        let mut from_parent = vec![usize::MAX; self.n];
        for (i, &v) in to_parent.iter().enumerate() {
            from_parent[v] = i;
        }
        let mut arcs = Vec::new();
        for (i, &u) in to_parent.iter().enumerate() {
            for &v in &self.out[u] {
                let j = from_parent[v];
                if j != usize::MAX && keep(u, v) {
                    arcs.push((i, j));
                }
            }
        }
        let graph = Digraph::new(to_parent.len(), &arcs)?;
        Ok(SubDigraph {
            graph,
            to_parent,
            from_parent,
        })
    }

    /// Every unordered pair carries exactly one arc.
    pub fn is_tournament(&self) -> bool {
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if self.has_arc(u, v) == self.has_arc(v, u) {
                    return false;
                }
            }
        }
        true
    }

    /// Text format: `n m` header, one `u v` arc per line, `#` comments.
    pub fn parse_text(input: &str) -> Result<Self, DigraphError> {
        let mut header: Option<(usize, usize)> = None;
        let mut arcs: Vec<(Vertex, Vertex)> = Vec::new();
        let mut seen: BTreeSet<(Vertex, Vertex)> = BTreeSet::new();
        for (idx, raw) in input.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let fail = |msg: &str| DigraphError::Parse {
                line: line_no,
                msg: msg.to_string(),
            };
            let a: usize = parts
                .next()
                .ok_or_else(|| fail("missing field"))?
                .parse()
                .map_err(|_| fail("expected integer"))?;
            let b: usize = parts
                .next()
                .ok_or_else(|| fail("missing second field"))?
                .parse()
                .map_err(|_| fail("expected integer"))?;
            if parts.next().is_some() {
                return Err(fail("trailing tokens"));
            }
            match header {
                None => {
                    if a == 0 {
                        return Err(fail("vertex count must be positive"));
                    }
                    header = Some((a, b));
                }
                Some((n, _)) => {
                    if a >= n || b >= n {
                        return Err(fail(&format!("vertex out of range (n={n})")));
                    }
                    if a == b {
                        return Err(fail("loop arc"));
                    }
                    if !seen.insert((a, b)) {
                        return Err(fail(&format!("duplicate arc ({a},{b})")));
                    }
                    arcs.push((a, b));
                }
            }
        }
        let (n, m) = header.ok_or(DigraphError::Parse {
            line: 0,
            msg: "missing header".to_string(),
        })?;
        if arcs.len() != m {
            return Err(DigraphError::Parse {
                line: 0,
                msg: format!("header declares {m} arcs, found {}", arcs.len()),
            });
        }
        Digraph::new(n, &arcs)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.n, self.m);
        for (u, v) in self.arcs() {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }
}

/// An induced or bipartite subgraph together with its id maps. Certificates
/// and witnesses always report parent-space ids, so the maps are retained
/// everywhere a subgraph travels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubDigraph {
    pub graph: Digraph,
    pub to_parent: Vec<Vertex>,
    from_parent: Vec<usize>,
}

impl SubDigraph {
    pub fn local(&self, parent: Vertex) -> Option<Vertex> {
        self.from_parent
            .get(parent)
            .copied()
            .filter(|&i| i != usize::MAX)
    }

    pub fn parent(&self, local: Vertex) -> Vertex {
        self.to_parent[local]
    }

    pub fn to_parent_set(&self, locals: &VertexSet) -> VertexSet {
        locals.iter().map(|&v| self.to_parent[v]).collect()
    }

    pub fn to_local_set(&self, parents: &VertexSet) -> VertexSet {
        parents.iter().filter_map(|&v| self.local(v)).collect()
    }
}

pub fn vset<I: IntoIterator<Item = Vertex>>(items: I) -> VertexSet {
    items.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_cycle() -> Digraph {
        Digraph::new(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn rejects_bad_construction() {
        assert_eq!(Digraph::new(0, &[]), Err(DigraphError::Empty));
        assert_eq!(Digraph::new(2, &[(0, 0)]), Err(DigraphError::Loop(0)));
        assert_eq!(
            Digraph::new(2, &[(0, 1), (0, 1)]),
            Err(DigraphError::DuplicateArc(0, 1))
        );
        assert_eq!(
            Digraph::new(2, &[(0, 2)]),
            Err(DigraphError::VertexOutOfRange(2, 2))
        );
    }

    #[test]
    fn out_neighbors_examples() {
        assert_eq!(three_cycle().out_neighbors(0), vset([1]));
        assert_eq!(Digraph::complete(3).out_neighbors(2), vset([0, 1]));
        assert_eq!(Digraph::new(4, &[]).unwrap().out_neighbors(3), vset([]));
    }

    #[test]
    fn degree_profile_examples() {
        let digon = Digraph::new(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(digon.degree_profile(0), (1, 1, 0, 0, 1));
        assert_eq!(three_cycle().degree_profile(0), (1, 1, 1, 1, 2));
        let k4 = Digraph::complete(4);
        for v in 0..4 {
            assert_eq!(k4.degree_profile(v), (3, 3, 0, 0, 3));
        }
    }

    #[test]
    fn min_union_degree_examples() {
        assert_eq!(Digraph::complete(5).min_union_degree(), 4);
        let path = Digraph::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(path.min_union_degree(), 1);
        let t3 = Digraph::new(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        assert_eq!(t3.min_union_degree(), 2);
        assert!(t3.is_tournament());
    }

    #[test]
    fn induced_examples() {
        let k4 = Digraph::complete(4);
        let sub = k4.induced(&vset([0, 1])).unwrap();
        assert_eq!(sub.graph, Digraph::complete(2));
        assert_eq!(sub.to_parent, vec![0, 1]);

        let sub = three_cycle().induced(&vset([0, 1])).unwrap();
        assert_eq!(sub.graph.arcs(), vec![(0, 1)]);

        assert_eq!(three_cycle().induced(&vset([])), Err(DigraphError::Empty));
        assert!(matches!(
            three_cycle().induced(&vset([0, 7])),
            Err(DigraphError::VertexOutOfRange(7, 3))
        ));
    }

    #[test]
    fn bipartite_subgraph_examples() {
        let d = Digraph::new(3, &[(0, 1), (0, 2), (2, 1)]).unwrap();
        let sub = d.bipartite_subgraph(&vset([0, 1]), &vset([2])).unwrap();
        let arcs: Vec<(Vertex, Vertex)> = sub
            .graph
            .arcs()
            .into_iter()
            .map(|(u, v)| (sub.parent(u), sub.parent(v)))
            .collect();
        assert_eq!(arcs, vec![(0, 2), (2, 1)]);

        let k4 = Digraph::complete(4);
        let sub = k4.bipartite_subgraph(&vset([0, 1]), &vset([2, 3])).unwrap();
        assert_eq!(sub.graph.arc_count(), 8);

        assert_eq!(
            k4.bipartite_subgraph(&vset([0, 1]), &vset([1, 2])),
            Err(DigraphError::Overlap(1))
        );
    }

    #[test]
    fn reverse_examples() {
        let rev = three_cycle().reverse();
        assert!(rev.has_arc(1, 0) && rev.has_arc(2, 1) && rev.has_arc(0, 2));
        assert_eq!(Digraph::complete(3).reverse(), Digraph::complete(3));
    }

    #[test]
    fn parse_text_round_trip_and_errors() {
        let g = Digraph::parse_text("# comment\n3 3\n0 1\n1 2\n2 0\n").unwrap();
        assert_eq!(g, three_cycle());
        assert_eq!(Digraph::parse_text(&g.to_text()).unwrap(), g);

        let err = Digraph::parse_text("2 2\n0 1\n0 1\n").unwrap_err();
        assert!(matches!(err, DigraphError::Parse { line: 3, .. }));
        let err = Digraph::parse_text("2 1\n1 1\n").unwrap_err();
        assert!(matches!(err, DigraphError::Parse { line: 2, .. }));
        let err = Digraph::parse_text("0 0\n").unwrap_err();
        assert!(matches!(err, DigraphError::Parse { line: 1, .. }));
        assert!(Digraph::parse_text("3 2\n0 1\n").is_err());
    }
}
