//! Terminal selection and the twelve-k dominating families, plus the
//! opening coloring pattern over them.

use super::coloring::{Color, Coloring};
use super::{ClaimLog, Mode, Parameters, PipelineError, Thresholds};
use crate::digraph::{Digraph, Vertex, VertexSet};
use crate::dominating::{almost_in_dominating, almost_out_dominating, DominatorTriple};

const PHASE: &str = "families";

/// The 6k in-degree-light and 6k out-degree-light terminals, with the
/// degree floors over the remaining vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XySelection {
    pub x: Vec<Vertex>,
    pub y: Vec<Vertex>,
    pub delta_minus: usize,
    pub delta_plus: usize,
}

impl XySelection {
    pub fn xy_union(&self) -> VertexSet {
        self.x.iter().chain(self.y.iter()).copied().collect()
    }
}

/// X: the 6k smallest in-degrees; Y: the 6k smallest out-degrees among the
/// rest. Ties break by id everywhere.
pub fn select_xy(d: &Digraph, params: &Parameters) -> Result<XySelection, PipelineError> {
    let n = d.vertex_count();
    let want = 6 * params.k;
    if n < 2 * want {
        return Err(PipelineError::new(
            PHASE,
            "xy-size",
            format!("need n >= 12k = {} (got {n})", 2 * want),
        ));
    }
    let mut by_in: Vec<Vertex> = d.vertices().collect();
    by_in.sort_by_key(|&v| (d.in_degree(v), v));
    let x: Vec<Vertex> = by_in[..want].to_vec();
    let x_set: VertexSet = x.iter().copied().collect();
    let mut by_out: Vec<Vertex> = d.vertices().filter(|v| !x_set.contains(v)).collect();
    by_out.sort_by_key(|&v| (d.out_degree(v), v));
    let y: Vec<Vertex> = by_out[..want].to_vec();
    let y_set: VertexSet = y.iter().copied().collect();
    let delta_minus = d
        .vertices()
        .filter(|v| !x_set.contains(v))
        .map(|v| d.in_degree(v))
        .min()
        .unwrap();
    let delta_plus = d
        .vertices()
        .filter(|v| !y_set.contains(v))
        .map(|v| d.out_degree(v))
        .min()
        .unwrap();
    Ok(XySelection {
        x,
        y,
        delta_minus,
        delta_plus,
    })
}

/// The 6k out-dominating and 6k in-dominating triples, built with the
/// forbidden set threaded so pairwise disjointness holds by construction.
#[derive(Debug, Clone)]
pub struct FamilyLedger {
    pub out_family: Vec<DominatorTriple>,
    pub in_family: Vec<DominatorTriple>,
}

impl FamilyLedger {
    pub fn size(&self) -> usize {
        self.out_family.len()
    }

    /// 1-indexed accessors matching the index classes used throughout.
    pub fn a(&self, i1: usize) -> Vertex {
        self.out_family[i1 - 1].anchor
    }

    pub fn b(&self, i1: usize) -> Vertex {
        self.in_family[i1 - 1].anchor
    }

    pub fn a_set(&self, i1: usize) -> &VertexSet {
        &self.out_family[i1 - 1].set
    }

    pub fn b_set(&self, i1: usize) -> &VertexSet {
        &self.in_family[i1 - 1].set
    }

    pub fn d0(&self) -> VertexSet {
        self.out_family
            .iter()
            .chain(self.in_family.iter())
            .flat_map(|t| t.set.iter().copied())
            .collect()
    }

    pub fn e_a(&self) -> VertexSet {
        self.out_family
            .iter()
            .flat_map(|t| t.exceptional.iter().copied())
            .collect()
    }

    pub fn e_b(&self) -> VertexSet {
        self.in_family
            .iter()
            .flat_map(|t| t.exceptional.iter().copied())
            .collect()
    }
}

pub fn build_families(
    d: &Digraph,
    params: &Parameters,
    th: &Thresholds,
    xy: &XySelection,
    log: &mut ClaimLog,
) -> Result<FamilyLedger, PipelineError> {
    let (k, l) = (params.k, params.l);
    let n = d.vertex_count();
    if params.mode == Mode::Strict {
        let need = 1e7 * k as f64 * ((k + l) * (k + l)) as f64 * params.log2_2kl();
        let have = n.min(xy.delta_minus).min(xy.delta_plus) as f64;
        log.gate_ge(
            PHASE,
            "EQ1",
            need,
            have,
            format!("strict connectivity floor {need} not met by {have}"),
        )?;
    }
    let c = th.c;
    let mut forbidden = xy.xy_union();
    let mut out_family = Vec::with_capacity(6 * k);
    for (idx, &x) in xy.x.iter().enumerate() {
        let mut local = forbidden.clone();
        local.remove(&x);
        let t = almost_out_dominating(d, x, c, l, &local).map_err(|e| {
            PipelineError::new(PHASE, format!("A{}", idx + 1), e.to_string())
        })?;
        forbidden.extend(t.set.iter().copied());
        out_family.push(t);
    }
    let mut in_family = Vec::with_capacity(6 * k);
    for (idx, &y) in xy.y.iter().enumerate() {
        let mut local = forbidden.clone();
        local.remove(&y);
        let t = almost_in_dominating(d, y, c, l, &local).map_err(|e| {
            PipelineError::new(PHASE, format!("B{}", idx + 1), e.to_string())
        })?;
        forbidden.extend(t.set.iter().copied());
        in_family.push(t);
    }
    let ledger = FamilyLedger {
        out_family,
        in_family,
    };
    validate_families(d, params, th, xy, &ledger, log)?;
    Ok(ledger)
}

fn validate_families(
    d: &Digraph,
    params: &Parameters,
    th: &Thresholds,
    xy: &XySelection,
    ledger: &FamilyLedger,
    log: &mut ClaimLog,
) -> Result<(), PipelineError> {
    let (k, l, c) = (params.k, params.l, th.c);
    // P0: pairwise disjoint, sizes within 2..=c
    let mut seen = VertexSet::new();
    let mut overlaps = 0usize;
    let mut size_bad = 0usize;
    for t in ledger.out_family.iter().chain(ledger.in_family.iter()) {
        if t.set.len() < 2 || t.set.len() > c {
            size_bad += 1;
        }
        for &v in &t.set {
            if !seen.insert(v) {
                overlaps += 1;
            }
        }
    }
    log.gate(
        PHASE,
        "P0",
        0.0,
        (overlaps + size_bad) as f64,
        format!("{overlaps} overlapping vertices, {size_bad} sets outside 2..={c}"),
    )?;

    // P1: spines span transitive tournaments with the required endpoints
    let mut spine_bad = 0usize;
    for t in ledger.out_family.iter().chain(ledger.in_family.iter()) {
        let ok_ends = match t.kind {
            crate::dominating::DominatorKind::Out => {
                t.spine.first() == Some(&t.anchor) && t.spine.last() == Some(&t.center)
            }
            crate::dominating::DominatorKind::In => {
                t.spine.first() == Some(&t.center) && t.spine.last() == Some(&t.anchor)
            }
        };
        let ok_arcs = (0..t.spine.len()).all(|i| {
            ((i + 1)..t.spine.len()).all(|j| d.has_arc(t.spine[i], t.spine[j]))
        });
        if !ok_ends || !ok_arcs {
            spine_bad += 1;
        }
    }
    log.gate(PHASE, "P1", 0.0, spine_bad as f64, "spine violations")?;

    // P3: domination relative to the whole family union and each E_i
    let d0 = ledger.d0();
    let mut undominated = 0usize;
    for t in ledger.out_family.iter().chain(ledger.in_family.iter()) {
        let dominators: Vec<Vertex> = t.set.iter().copied().filter(|&u| u != t.anchor).collect();
        for u in d.vertices() {
            if d0.contains(&u) || t.exceptional.contains(&u) {
                continue;
            }
            let ok = match t.kind {
                crate::dominating::DominatorKind::Out => {
                    dominators.iter().any(|&w| d.has_arc(w, u))
                }
                crate::dominating::DominatorKind::In => {
                    dominators.iter().any(|&w| d.has_arc(u, w))
                }
            };
            if !ok {
                undominated += 1;
            }
        }
    }
    log.gate(PHASE, "P3", 0.0, undominated as f64, "domination gaps")?;

    // P4: per-family exceptional bounds against the degree floors
    let shift = (c - 2).min(60) as f64;
    let p4_bound = |floor: usize| floor as f64 / 2f64.powf(shift) + (c * (l - 1)) as f64;
    let worst_a = ledger
        .out_family
        .iter()
        .map(|t| t.exceptional.len())
        .max()
        .unwrap_or(0);
    let worst_b = ledger
        .in_family
        .iter()
        .map(|t| t.exceptional.len())
        .max()
        .unwrap_or(0);
    log.gate(
        PHASE,
        "P4",
        p4_bound(xy.delta_minus),
        worst_a as f64,
        "out-family exceptional set too large",
    )?;
    log.gate(
        PHASE,
        "P4'",
        p4_bound(xy.delta_plus),
        worst_b as f64,
        "in-family exceptional set too large",
    )?;

    // aggregate slack lines; informational in scaled mode
    let e_a = ledger.e_a().len() as f64;
    let e_b = ledger.e_b().len() as f64;
    let s = params.scale;
    log.note("EQ2.EA", s.apply(xy.delta_minus as f64 / (2e3 * k as f64)), e_a);
    log.note("EQ2.EB", s.apply(xy.delta_plus as f64 / (2e3 * k as f64)), e_b);
    log.note(
        "EQ2.E",
        s.apply(xy.delta_plus.max(xy.delta_minus) as f64 / (1e3 * k as f64)),
        e_a + e_b,
    );
    Ok(())
}

/// Opening coloring over the family union: the five first-color classes by
/// index range, everything else in the union gets the second color.
pub fn initial_coloring(
    ledger: &FamilyLedger,
    k: usize,
    coloring: &mut Coloring,
) -> Result<(), PipelineError> {
    let d0 = ledger.d0();
    let mut first = VertexSet::new();
    for i1 in 1..=(6 * k) {
        let a_set = ledger.a_set(i1);
        let b_set = ledger.b_set(i1);
        let (a, b) = (ledger.a(i1), ledger.b(i1));
        if i1 <= k {
            first.extend(a_set.iter().copied());
            first.extend(b_set.iter().copied());
        } else if i1 <= 2 * k {
            // second color via the complement
        } else if i1 <= 3 * k {
            first.insert(a);
            first.insert(b);
        } else if i1 <= 4 * k {
            first.extend(a_set.iter().copied().filter(|&v| v != a && v != b));
            first.extend(b_set.iter().copied().filter(|&v| v != a && v != b));
        } else if i1 <= 5 * k {
            first.extend(a_set.iter().copied().filter(|&v| v != a));
            first.insert(b);
        } else {
            first.extend(b_set.iter().copied().filter(|&v| v != b));
            first.insert(a);
        }
    }
    for &v in &d0 {
        let color = if first.contains(&v) { Color::I } else { Color::II };
        coloring.set("initial-coloring", v, color)?;
    }
    coloring.d0 = d0;
    coloring.d0_prime = first;
    coloring.e_a = ledger.e_a();
    coloring.e_b = ledger.e_b();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Scale;

    fn scaled_params(k: usize, l: usize) -> Parameters {
        let mut p = Parameters::scaled(k, l, 6, 6, Scale::new(1, 8));
        p.c = Some(2);
        p
    }

    #[test]
    fn xy_on_complete_graph_ties_by_id() {
        let k14 = Digraph::complete(14);
        let xy = select_xy(&k14, &scaled_params(1, 1)).unwrap();
        assert_eq!(xy.x, vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(xy.y, vec![6, 7, 8, 9, 10, 11]);
        assert_eq!(xy.delta_minus, 13);
        assert_eq!(xy.delta_plus, 13);
    }

    #[test]
    fn xy_too_small_errors() {
        let k10 = Digraph::complete(10);
        assert!(select_xy(&k10, &scaled_params(1, 1)).is_err());
    }

    #[test]
    fn sink_like_vertex_lands_in_y() {
        // vertex 13 receives from everyone, sends to no one outside forced arcs
        let mut arcs = Vec::new();
        for u in 0..13usize {
            for v in 0..13usize {
                if u != v {
                    arcs.push((u, v));
                }
            }
            arcs.push((u, 13));
        }
        let d = Digraph::new(14, &arcs).unwrap();
        let xy = select_xy(&d, &scaled_params(1, 1)).unwrap();
        assert!(xy.x.contains(&13) || xy.y.contains(&13));
        assert!(xy.y.contains(&13));
    }

    #[test]
    fn families_and_initial_coloring_on_complete_graph() {
        let d = Digraph::complete(60);
        let params = scaled_params(1, 1);
        let th = Thresholds::derive(&params);
        let xy = select_xy(&d, &params).unwrap();
        let mut log = ClaimLog::default();
        let ledger = build_families(&d, &params, &th, &xy, &mut log).unwrap();
        assert_eq!(ledger.out_family.len(), 6);
        assert_eq!(ledger.in_family.len(), 6);
        assert!(log.checks.iter().all(|c| c.pass));

        let mut coloring = Coloring::new(60);
        initial_coloring(&ledger, 1, &mut coloring).unwrap();
        // class 1: both sets fully first-colored
        for &v in ledger.a_set(1).iter().chain(ledger.b_set(1).iter()) {
            assert_eq!(coloring.color_of(v), Some(Color::I));
        }
        // class 2: fully second-colored
        for &v in ledger.a_set(2).iter().chain(ledger.b_set(2).iter()) {
            assert_eq!(coloring.color_of(v), Some(Color::II));
        }
        // class 3: exactly the two anchors first-colored
        for &v in ledger.a_set(3).iter().chain(ledger.b_set(3).iter()) {
            let expect = if v == ledger.a(3) || v == ledger.b(3) {
                Color::I
            } else {
                Color::II
            };
            assert_eq!(coloring.color_of(v), Some(expect));
        }
        // every family vertex got exactly one color
        for &v in &coloring.d0.clone() {
            assert!(coloring.is_colored(v));
        }
        assert_eq!(coloring.colored_count(), coloring.d0.len());
    }
}
