//! Unit-capacity max-flow on the vertex-split graph, used to compute
//! internally disjoint path counts and minimum vertex cuts.
//!
//! Each vertex v becomes v_in -> v_out with capacity 1 (or unbounded for
//! exempt vertices); arcs get unbounded capacity so minimum cuts consist of
//! split edges only and map straight back to vertex sets.

use crate::digraph::{Digraph, Vertex, VertexSet};

const INF: i64 = i64::MAX / 4;

#[derive(Clone)]
pub struct FlowNet {
    first: Vec<Vec<u32>>,
    to: Vec<u32>,
    cap: Vec<i64>,
}

impl FlowNet {
    pub fn new(nodes: usize) -> Self {
        Self {
            first: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, c: i64) {
        let e = self.to.len() as u32;
        self.to.push(v as u32);
        self.cap.push(c);
        self.to.push(u as u32);
        self.cap.push(0);
        self.first[u].push(e);
        self.first[v].push(e + 1);
    }

    /// BFS augmentation until `limit` units are routed or no path remains.
    /// Every augmenting path here has bottleneck 1, so each round adds 1.
    pub fn max_flow(&mut self, s: usize, t: usize, limit: i64) -> i64 {
        self.max_flow_tracked(s, t, limit, &mut Vec::new())
    }

    /// As [`max_flow`], recording every saturating edge index so the run
    /// can be undone in O(touched) by [`undo`].
    pub fn max_flow_tracked(
        &mut self,
        s: usize,
        t: usize,
        limit: i64,
        touched: &mut Vec<u32>,
    ) -> i64 {
        let n = self.first.len();
        let mut flow = 0;
        let mut parent: Vec<u32> = vec![u32::MAX; n];
        let mut queue: Vec<u32> = Vec::with_capacity(n);
        while flow < limit {
            parent.iter_mut().for_each(|p| *p = u32::MAX);
            queue.clear();
            queue.push(s as u32);
            parent[s] = u32::MAX - 1;
            let mut head = 0;
            let mut reached = false;
            'bfs: while head < queue.len() {
                let u = queue[head] as usize;
                head += 1;
                for &e in &self.first[u] {
                    let v = self.to[e as usize] as usize;
                    if self.cap[e as usize] > 0 && parent[v] == u32::MAX {
                        parent[v] = e;
                        if v == t {
                            reached = true;
                            break 'bfs;
                        }
                        queue.push(v as u32);
                    }
                }
            }
            if !reached {
                break;
            }
            let mut v = t;
            while v != s {
                let e = parent[v] as usize;
                self.cap[e] -= 1;
                self.cap[e ^ 1] += 1;
                touched.push(e as u32);
                v = self.to[e ^ 1] as usize;
            }
            flow += 1;
        }
        flow
    }

    /// Reverts the capacity changes of a tracked run.
    pub fn undo(&mut self, touched: &[u32]) {
        for &e in touched {
            self.cap[e as usize] += 1;
            self.cap[(e ^ 1) as usize] -= 1;
        }
    }

    /// Residual-reachable set from `s` after a max-flow run.
    pub fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let n = self.first.len();
        let mut seen = vec![false; n];
        let mut queue = vec![s];
        seen[s] = true;
        while let Some(u) = queue.pop() {
            for &e in &self.first[u] {
                let v = self.to[e as usize] as usize;
                if self.cap[e as usize] > 0 && !seen[v] {
                    seen[v] = true;
                    queue.push(v);
                }
            }
        }
        seen
    }
}

fn node_in(v: Vertex) -> usize {
    2 * v
}

fn node_out(v: Vertex) -> usize {
    2 * v + 1
}

/// Reusable vertex-split network for many pair queries on one digraph.
/// Split edges of vertex v are the edge pair (2v, 2v+1), so per-query
/// exemptions and flow changes undo in O(touched).
#[derive(Clone)]
pub struct VertexFlowCache {
    net: FlowNet,
    n: usize,
}

impl VertexFlowCache {
    pub fn new(d: &Digraph) -> Self {
        let n = d.vertex_count();
        let mut net = FlowNet::new(2 * n);
        for v in 0..n {
            net.add_edge(node_in(v), node_out(v), 1);
        }
        for u in 0..n {
            for &v in d.out_list(u) {
                net.add_edge(node_out(u), node_in(v), INF);
            }
        }
        Self { net, n }
    }

    /// Internally disjoint x->y path count, capped at `limit`, with the
    /// minimum vertex cut when the cap is not reached. Assumes the arc
    /// (x, y) is absent; callers treat adjacent pairs as unseparable.
    pub fn local_connectivity(
        &mut self,
        x: Vertex,
        y: Vertex,
        limit: i64,
    ) -> (i64, Option<VertexSet>) {
        let split = |v: Vertex| 2 * v;
        self.net.cap[split(x)] = INF;
        self.net.cap[split(y)] = INF;
        let mut touched = Vec::new();
        let flow = self
            .net
            .max_flow_tracked(node_out(x), node_in(y), limit, &mut touched);
        let cut = if flow >= limit {
            None
        } else {
            let reach = self.net.residual_reachable(node_out(x));
            Some(
                (0..self.n)
                    .filter(|&v| v != x && v != y && reach[node_in(v)] && !reach[node_out(v)])
                    .collect::<VertexSet>(),
            )
        };
        self.net.undo(&touched);
        self.net.cap[split(x)] = 1;
        self.net.cap[split(y)] = 1;
        // exempt split edges may have accumulated reverse residue
        self.net.cap[split(x) + 1] = 0;
        self.net.cap[split(y) + 1] = 0;
        (flow, cut)
    }
}

/// One-shot form of [`VertexFlowCache::local_connectivity`].
pub fn local_connectivity(
    d: &Digraph,
    x: Vertex,
    y: Vertex,
    limit: i64,
) -> (i64, Option<VertexSet>) {
    VertexFlowCache::new(d).local_connectivity(x, y, limit)
}

/// Menger value from `v` into the terminal set, capped at `limit`. Terminals
/// are absorbing as destinations but count as deletable vertices; `v` itself
/// is exempt from deletion. Returns the blocking vertex set when below cap.
pub fn source_to_set_connectivity(
    d: &Digraph,
    v: Vertex,
    terminals: &VertexSet,
    limit: i64,
) -> (i64, Option<VertexSet>) {
    let n = d.vertex_count();
    let sink = 2 * n;
    let mut net = FlowNet::new(2 * n + 1);
    for u in 0..n {
        let c = if u == v { INF } else { 1 };
        net.add_edge(node_in(u), node_out(u), c);
    }
    for u in 0..n {
        for &w in d.out_list(u) {
            net.add_edge(node_out(u), node_in(w), INF);
        }
    }
    for &t in terminals {
        net.add_edge(node_out(t), sink, 1);
    }
    let flow = net.max_flow(node_out(v), sink, limit);
    if flow >= limit {
        return (flow, None);
    }
    let reach = net.residual_reachable(node_out(v));
    let mut cut: VertexSet = VertexSet::new();
    for u in 0..n {
        if u != v && reach[node_in(u)] && !reach[node_out(u)] {
            cut.insert(u);
        }
    }
    for &t in terminals {
        if t != v && reach[node_out(t)] && !reach[sink] {
            cut.insert(t);
        }
    }
    (flow, Some(cut))
}
