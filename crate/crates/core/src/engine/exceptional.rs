//! Coloring of the exceptional vertices left over after the path phases.
//! Each one is resolved by the first applicable of three cases: an arc into
//! a reserved middle segment, a fresh neighbor fan, or support from the
//! alternating flank windows.

use super::coloring::{Color, Coloring};
use super::long_paths::{PathPlan, Segments};
use super::{ClaimLog, Parameters, PipelineError, Thresholds};
use crate::digraph::{Digraph, Vertex, VertexSet};

const PHASE: &str = "exceptional";

/// Bookkeeping for the auxiliary vertices colored alongside the exceptional
/// ones, plus the uncolored long-path leftovers.
#[derive(Debug, Default, Clone)]
pub struct ExceptionLedger {
    pub z_a: VertexSet,
    pub z_b: VertexSet,
    pub w: VertexSet,
}

struct WindowSets {
    /// Middle segments of the reserved paths.
    reserved_mid: VertexSet,
    /// Opening flank windows of the spare paths, position-indexed.
    open_flanks: Vec<Vec<Vertex>>,
    /// Closing flank windows of the spare paths, position-indexed.
    close_flanks: Vec<Vec<Vertex>>,
}

fn window_sets(plan: &PathPlan, th: &Thresholds) -> WindowSets {
    let mut reserved_mid = VertexSet::new();
    for &(i1, j) in &plan.l3 {
        let p = &plan.long[&(i1, j)];
        if let Some(segs) = Segments::of(p, th) {
            for t in segs.p2() {
                reserved_mid.insert(p.vertices[t]);
            }
        }
    }
    let mut open_flanks = Vec::new();
    let mut close_flanks = Vec::new();
    for &(i1, j) in &plan.l4 {
        let p = &plan.long[&(i1, j)];
        if let Some(segs) = Segments::of(p, th) {
            open_flanks.push(segs.p11().map(|t| p.vertices[t]).collect());
            close_flanks.push(segs.p33().map(|t| p.vertices[t]).collect());
        }
    }
    WindowSets {
        reserved_mid,
        open_flanks,
        close_flanks,
    }
}

/// Window-scan support count: walk the closing flank along its orientation,
/// find the first vertex feeding `v`, and credit half the remaining window
/// minus the density slack per color.
fn close_flank_support(d: &Digraph, flank: &[Vertex], v: Vertex, l: usize) -> usize {
    for (idx, &w) in flank.iter().enumerate() {
        if d.has_arc(w, v) {
            let label = flank.len() - idx;
            return (label / 2).saturating_sub(l + 2);
        }
    }
    0
}

/// Mirror scan for the opening flank: walk against the orientation and look
/// for the first vertex fed by `v`.
fn open_flank_support(d: &Digraph, flank: &[Vertex], v: Vertex, l: usize) -> usize {
    for (idx, &w) in flank.iter().enumerate().rev() {
        if d.has_arc(v, w) {
            let label = idx + 1;
            return (label / 2).saturating_sub(l + 2);
        }
    }
    0
}

pub fn exceptional_coloring(
    d: &Digraph,
    params: &Parameters,
    th: &Thresholds,
    plan: &PathPlan,
    coloring: &mut Coloring,
    log: &mut ClaimLog,
) -> Result<ExceptionLedger, PipelineError> {
    let (k, l) = (params.k, params.l);
    let windows = window_sets(plan, th);
    let long_union = plan.long_vertex_union();
    let w: VertexSet = long_union
        .iter()
        .copied()
        .filter(|&v| !coloring.is_colored(v))
        .collect();
    let mut ledger = ExceptionLedger {
        w,
        ..Default::default()
    };
    let e_a = coloring.e_a.clone();
    let e_b = coloring.e_b.clone();
    let e_all: VertexSet = e_a.union(&e_b).copied().collect();
    let d3_gate = params
        .scale
        .apply(2500.0 * k as f64 * ((k + l) * (k + l)) as f64 * params.log2_2kl())
        .max(1.0);

    // incoming side first
    for &v in &e_a {
        if coloring.is_colored(v) || ledger.w.contains(&v) {
            continue;
        }
        // case 1: an in-neighbor on a reserved middle segment
        if d.in_list(v).iter().any(|u| windows.reserved_mid.contains(u)) {
            coloring.set(PHASE, v, Color::I)?;
            continue;
        }
        // case 2: a fan of fresh in-neighbors outside the incoming
        // exceptional set, split between the colors
        let fresh: Vec<Vertex> = d
            .in_list(v)
            .iter()
            .copied()
            .filter(|u| !coloring.is_colored(*u) && !e_a.contains(u))
            .take(2 * k)
            .collect();
        if fresh.len() == 2 * k {
            for (idx, &u) in fresh.iter().enumerate() {
                let color = if idx < k { Color::I } else { Color::II };
                coloring.set(PHASE, u, color)?;
                ledger.z_a.insert(u);
            }
            coloring.set(PHASE, v, Color::I)?;
            log.gate(
                PHASE,
                "C11.ZA",
                (2 * k * e_a.len()) as f64,
                ledger.z_a.len() as f64,
                "auxiliary incoming set outgrew its budget",
            )?;
            continue;
        }
        // case 3: flank-window support
        let flank_in_degree = d
            .in_list(v)
            .iter()
            .filter(|u| {
                windows.open_flanks.iter().any(|f| f.contains(u))
                    || windows.close_flanks.iter().any(|f| f.contains(u))
            })
            .count();
        if (flank_in_degree as f64) >= d3_gate {
            let support: usize = windows
                .close_flanks
                .iter()
                .map(|f| close_flank_support(d, f, v, l))
                .sum();
            let has_open = windows
                .open_flanks
                .iter()
                .any(|f| f.iter().any(|&u| d.has_arc(u, v)));
            if support >= k || has_open {
                coloring.set(PHASE, v, Color::I)?;
                continue;
            }
        }
        return Err(PipelineError::new(
            PHASE,
            "D-cases",
            format!("no case applies to incoming-exceptional vertex {v}"),
        ));
    }

    // outgoing side, mirrored
    for &v in &e_b {
        if coloring.is_colored(v) || ledger.w.contains(&v) {
            continue;
        }
        if d.out_list(v).iter().any(|u| windows.reserved_mid.contains(u)) {
            coloring.set(PHASE, v, Color::I)?;
            continue;
        }
        let fresh: Vec<Vertex> = d
            .out_list(v)
            .iter()
            .copied()
            .filter(|u| !coloring.is_colored(*u) && !e_all.contains(u))
            .take(2 * k)
            .collect();
        if fresh.len() == 2 * k {
            for (idx, &u) in fresh.iter().enumerate() {
                let color = if idx < k { Color::I } else { Color::II };
                coloring.set(PHASE, u, color)?;
                ledger.z_b.insert(u);
            }
            coloring.set(PHASE, v, Color::I)?;
            log.gate(
                PHASE,
                "C11.ZB",
                (2 * k * e_b.len()) as f64,
                ledger.z_b.len() as f64,
                "auxiliary outgoing set outgrew its budget",
            )?;
            continue;
        }
        let flank_out_degree = d
            .out_list(v)
            .iter()
            .filter(|u| {
                windows.open_flanks.iter().any(|f| f.contains(u))
                    || windows.close_flanks.iter().any(|f| f.contains(u))
            })
            .count();
        if (flank_out_degree as f64) >= d3_gate {
            let support: usize = windows
                .open_flanks
                .iter()
                .map(|f| open_flank_support(d, f, v, l))
                .sum();
            let has_close = windows
                .close_flanks
                .iter()
                .any(|f| f.iter().any(|&u| d.has_arc(v, u)));
            if support >= k || has_close {
                coloring.set(PHASE, v, Color::I)?;
                continue;
            }
        }
        return Err(PipelineError::new(
            PHASE,
            "D-cases",
            format!("no case applies to outgoing-exceptional vertex {v}"),
        ));
    }

    log.note(
        "C11.C6",
        d.vertex_count() as f64 / 20.0,
        coloring.colored_count() as f64,
    );
    Ok(ledger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Scale;

    #[test]
    fn empty_exceptional_sets_are_a_no_op() {
        let d = Digraph::complete(20);
        let params = Parameters::scaled(1, 1, 10, 10, Scale::new(1, 8));
        let th = Thresholds::derive(&params);
        let plan = PathPlan::default();
        let mut coloring = Coloring::new(20);
        let mut log = ClaimLog::default();
        let ledger =
            exceptional_coloring(&d, &params, &th, &plan, &mut coloring, &mut log).unwrap();
        assert!(ledger.z_a.is_empty() && ledger.z_b.is_empty() && ledger.w.is_empty());
        assert_eq!(coloring.colored_count(), 0);
    }

    #[test]
    fn fresh_fan_case_extends_ledger_by_two_k() {
        let d = Digraph::complete(12);
        let params = Parameters::scaled(1, 1, 6, 6, Scale::new(1, 8));
        let th = Thresholds::derive(&params);
        let plan = PathPlan::default();
        let mut coloring = Coloring::new(12);
        coloring.e_a = [0usize].into_iter().collect();
        let mut log = ClaimLog::default();
        let ledger =
            exceptional_coloring(&d, &params, &th, &plan, &mut coloring, &mut log).unwrap();
        // no reserved middles exist, so the fan case fires: 2k = 2 helpers
        assert_eq!(ledger.z_a.len(), 2);
        assert_eq!(coloring.color_of(0), Some(Color::I));
        let helpers: Vec<Color> = ledger
            .z_a
            .iter()
            .map(|&u| coloring.color_of(u).unwrap())
            .collect();
        assert!(helpers.contains(&Color::I) && helpers.contains(&Color::II));
    }

    #[test]
    fn flank_scan_support_counts() {
        // flank of 8 vertices 0..8; vertex 9 receives an arc from flank[2]
        let mut arcs = vec![(2usize, 9usize)];
        for t in 0..7usize {
            arcs.push((t, t + 1));
        }
        let d = Digraph::new(10, &arcs).unwrap();
        let flank: Vec<Vertex> = (0..8).collect();
        // first feeder along orientation sits at index 2: label 6, support
        // floor(6/2) - (l + 2) = 0 for l = 1
        assert_eq!(close_flank_support(&d, &flank, 9, 1), 0);
        // a feeder at index 0 gives label 8 and support 1
        let mut arcs2 = vec![(0usize, 9usize)];
        for t in 0..7usize {
            arcs2.push((t, t + 1));
        }
        let d2 = Digraph::new(10, &arcs2).unwrap();
        assert_eq!(close_flank_support(&d2, &flank, 9, 1), 1);
    }
}
