//! The four-clause safety predicate, the phase-wide certification sweeps,
//! and the closure that colors repair sets until every working vertex is
//! certifiably safe.

use rayon::prelude::*;

use super::coloring::{Color, Coloring, RecolorKind};
use super::{ClaimLog, Parameters, PipelineError};
use crate::digraph::{Digraph, SubDigraph, Vertex, VertexSet};
use crate::dominating::{core_set, reach_sets};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clause {
    S1,
    S2,
    S3,
    S4,
}

impl Clause {
    pub fn as_str(self) -> &'static str {
        match self {
            Clause::S1 => "s1",
            Clause::S2 => "s2",
            Clause::S3 => "s3",
            Clause::S4 => "s4",
        }
    }
}

struct SideView {
    sub: SubDigraph,
    rev: Digraph,
    /// Local images of the two safety target sets.
    target_b: VertexSet,
    target_a: VertexSet,
}

impl SideView {
    fn build(d: &Digraph, members: &VertexSet, cross_only: Option<&VertexSet>, ta: &VertexSet, tb: &VertexSet) -> Option<Self> {
        if members.is_empty() {
            return None;
        }
        let sub = match cross_only {
            None => d.induced(members).ok()?,
            Some(second) => d.bipartite_subgraph(members, second).ok()?,
        };
        let rev = sub.graph.reverse();
        let target_b = sub.to_local_set(tb);
        let target_a = sub.to_local_set(ta);
        Some(Self {
            sub,
            rev,
            target_b,
            target_a,
        })
    }
}

/// Frozen view of the current coloring: both side graphs, the crossing
/// graph, their reversals, and the safety target sets in local ids. Queries
/// against it are pure and fan out safely.
pub struct SafetyContext {
    side_i: Option<SideView>,
    side_ii: Option<SideView>,
    cross: Option<SideView>,
}

impl SafetyContext {
    pub fn build(d: &Digraph, coloring: &Coloring) -> Self {
        Self::build_with_override(d, coloring, None)
    }

    /// Builds the view as if `override_assign` were already applied; used by
    /// the tentative both-color checks without mutating the real coloring.
    pub fn build_with_override(
        d: &Digraph,
        coloring: &Coloring,
        override_assign: Option<(Vertex, Color)>,
    ) -> Self {
        let mut v_i = coloring.set_of(Color::I);
        let mut v_ii = coloring.set_of(Color::II);
        if let Some((v, c)) = override_assign {
            match c {
                Color::I => {
                    v_ii.remove(&v);
                    v_i.insert(v);
                }
                Color::II => {
                    v_i.remove(&v);
                    v_ii.insert(v);
                }
            }
        }
        let mut excluded_b: VertexSet = coloring.d0.clone();
        excluded_b.extend(coloring.e_b.iter().copied());
        let target_b: VertexSet = d.vertices().filter(|v| !excluded_b.contains(v)).collect();
        let mut excluded_a: VertexSet = coloring.d0.clone();
        excluded_a.extend(coloring.e_a.iter().copied());
        let target_a: VertexSet = d.vertices().filter(|v| !excluded_a.contains(v)).collect();
        SafetyContext {
            side_i: SideView::build(d, &v_i, None, &target_a, &target_b),
            side_ii: SideView::build(d, &v_ii, None, &target_a, &target_b),
            cross: if v_i.is_empty() || v_ii.is_empty() {
                SideView::build(d, &v_i.union(&v_ii).copied().collect(), None, &target_a, &target_b)
            } else {
                SideView::build(d, &v_i, Some(&v_ii), &target_a, &target_b)
            },
        }
    }

    fn side(&self, c: Color) -> Option<&SideView> {
        match c {
            Color::I => self.side_i.as_ref(),
            Color::II => self.side_ii.as_ref(),
        }
    }
}

fn clause_holds(view: &SideView, v: Vertex, k: usize, incoming: bool, target_b: bool) -> bool {
    let Some(local) = view.sub.local(v) else {
        return false;
    };
    let target = if target_b { &view.target_b } else { &view.target_a };
    let graph = if incoming { &view.rev } else { &view.sub.graph };
    crate::connectivity::pair_k_connected_from(graph, local, target, k)
        .map(|(ok, _)| ok)
        .unwrap_or(false)
}

/// Evaluates the four clauses for a colored vertex and reports the first
/// one that fails.
pub fn is_safe(
    ctx: &SafetyContext,
    coloring: &Coloring,
    v: Vertex,
    k: usize,
) -> Result<(bool, Option<Clause>), PipelineError> {
    let color = coloring
        .color_of(v)
        .ok_or_else(|| PipelineError::new("safety", "is-safe", format!("vertex {v} is uncolored")))?;
    is_safe_as(ctx, v, color, k)
}

fn is_safe_as(
    ctx: &SafetyContext,
    v: Vertex,
    color: Color,
    k: usize,
) -> Result<(bool, Option<Clause>), PipelineError> {
    let side = ctx.side(color).ok_or_else(|| {
        PipelineError::new("safety", "is-safe", format!("color class of {v} is empty"))
    })?;
    if !clause_holds(side, v, k, false, true) {
        return Ok((false, Some(Clause::S1)));
    }
    if !clause_holds(side, v, k, true, false) {
        return Ok((false, Some(Clause::S2)));
    }
    let cross = ctx.cross.as_ref().ok_or_else(|| {
        PipelineError::new("safety", "is-safe", "crossing graph is empty".to_string())
    })?;
    if !clause_holds(cross, v, k, false, true) {
        return Ok((false, Some(Clause::S3)));
    }
    if !clause_holds(cross, v, k, true, false) {
        return Ok((false, Some(Clause::S4)));
    }
    Ok((true, None))
}

/// Certification sweep: every colored vertex must be safe. Runs the
/// independent per-vertex checks in parallel and reports the smallest
/// failing vertex for determinism.
pub fn sweep(
    d: &Digraph,
    coloring: &Coloring,
    k: usize,
    phase: &'static str,
) -> Result<(), PipelineError> {
    let ctx = SafetyContext::build(d, coloring);
    let colored: Vec<Vertex> = coloring.colored_set().into_iter().collect();
    let failure = colored
        .par_iter()
        .filter_map(|&v| match is_safe(&ctx, coloring, v, k) {
            Ok((true, _)) => None,
            Ok((false, clause)) => Some((v, clause)),
            Err(_) => Some((v, None)),
        })
        .min_by_key(|&(v, _)| v);
    match failure {
        None => Ok(()),
        Some((v, clause)) => Err(PipelineError::new(
            phase,
            "safety-sweep",
            format!(
                "vertex {v} failed {}",
                clause.map(|c| c.as_str()).unwrap_or("evaluation")
            ),
        )),
    }
}

/// Tentatively colors `v` each way and checks safety; vertices outside the
/// frozen family-and-exceptional context are safe by target membership, so
/// the expensive path only runs for the few that are not.
pub fn safe_with_both_colors(
    d: &Digraph,
    coloring: &Coloring,
    v: Vertex,
    k: usize,
) -> Result<bool, PipelineError> {
    if !coloring.d0.contains(&v) && !coloring.e_a.contains(&v) && !coloring.e_b.contains(&v) {
        return Ok(true);
    }
    for color in [Color::I, Color::II] {
        let ctx = SafetyContext::build_with_override(d, coloring, Some((v, color)));
        let (ok, _) = is_safe_as(&ctx, v, color, k)?;
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Picks `count` fresh vertices from `candidates` (already in deterministic
/// order), colors them, and returns them; fails with the starving set name.
fn grab_and_color(
    phase: &'static str,
    set_name: &'static str,
    coloring: &mut Coloring,
    candidates: &[Vertex],
    count: usize,
    excluded: impl Fn(Vertex) -> bool,
    color: Color,
) -> Result<Vec<Vertex>, PipelineError> {
    let mut taken = Vec::with_capacity(count);
    for &v in candidates {
        if taken.len() == count {
            break;
        }
        if coloring.is_colored(v) || excluded(v) {
            continue;
        }
        coloring.set(phase, v, color)?;
        taken.push(v);
    }
    if taken.len() < count {
        return Err(PipelineError::new(
            phase,
            format!("{set_name}-pool"),
            format!("needed {count} fresh vertices for {set_name}, found {}", taken.len()),
        ));
    }
    Ok(taken)
}

pub struct ClosureRequest<'a> {
    pub phase: &'static str,
    /// Protected set; must contain both terminal sets and every vertex the
    /// closure is not allowed to touch.
    pub c_avoid: &'a VertexSet,
    pub w_i: &'a VertexSet,
    pub w_ii: &'a VertexSet,
    pub l_prime: usize,
}

/// Colors repair sets so that everything in `w_i ∪ w_ii` plus the newly
/// colored vertices is safe. First the crossing clauses are repaired via
/// out- and in-fans onto the reach sets of the crossing graph, with a core
/// recoloring to fix the fans' own crossing clauses; then each side repairs
/// its same-side clauses through the mirrored construction. Returns the set
/// of vertices colored here.
pub fn safety_closure(
    d: &Digraph,
    params: &Parameters,
    coloring: &mut Coloring,
    log: &mut ClaimLog,
    req: ClosureRequest<'_>,
) -> Result<VertexSet, PipelineError> {
    let phase = req.phase;
    let (k, l) = (params.k, params.l);
    let scale = params.scale;
    let f = params.f();
    let lg = params.log2_2kl();

    if req.w_i.len() > req.l_prime || req.w_ii.len() > req.l_prime {
        return Err(PipelineError::new(
            phase,
            "C1.w-budget",
            format!(
                "working sets {}/{} exceed budget {}",
                req.w_i.len(),
                req.w_ii.len(),
                req.l_prime
            ),
        ));
    }
    if req.w_i.iter().chain(req.w_ii.iter()).any(|v| req.c_avoid.contains(v)) {
        return Err(PipelineError::new(
            phase,
            "C1.w-disjoint",
            "protected set intersects the working sets",
        ));
    }
    if req.w_i.is_empty() && req.w_ii.is_empty() {
        return Ok(VertexSet::new());
    }

    let d1_members: VertexSet = req.w_i.union(req.w_ii).copied().collect();
    let d0 = coloring.d0.clone();
    let e_a_set = coloring.e_a.clone();
    let e_all: VertexSet = coloring.e_a.union(&coloring.e_b).copied().collect();
    let in_e_prime = |v: Vertex| {
        req.c_avoid.contains(&v)
            || d1_members.contains(&v)
            || d0.contains(&v)
            || e_all.contains(&v)
    };
    let in_e_a_prime = |v: Vertex| {
        req.c_avoid.contains(&v)
            || d1_members.contains(&v)
            || d0.contains(&v)
            || e_a_set.contains(&v)
    };

    // ---- step 1: crossing clauses for the working sets ----
    let l0 = l + req.l_prime;
    let (d1_heads, d1_tails) = {
        let sub = if req.w_i.is_empty() || req.w_ii.is_empty() {
            d.induced(&d1_members)
        } else {
            d.bipartite_subgraph(req.w_i, req.w_ii)
        }
        .map_err(|e| PipelineError::new(phase, "C1.D1", e.to_string()))?;
        let deficiency = sub.graph.vertex_count() - sub.graph.min_union_degree();
        log.note("C1.D1-degree", l0 as f64, deficiency as f64);
        let l_eff = l0.max(deficiency).max(1);
        let r = reach_sets(&sub.graph, k, l_eff)
            .map_err(|e| PipelineError::new(phase, "C1.reach", e.to_string()))?;
        (sub.to_parent_set(&r.u_set), sub.to_parent_set(&r.w_set))
    };

    let mut newly = VertexSet::new();

    // out-fans from the heads: each head gets k fresh opposite-color
    // out-neighbors, making the whole crossing graph reach safe territory
    let mut q_prime = VertexSet::new();
    for &u in &d1_heads {
        let cu = coloring.color_of(u).expect("working vertices are colored");
        let got = grab_and_color(
            phase,
            "C1.Q'",
            coloring,
            d.out_list(u),
            k,
            in_e_prime,
            cu.other(),
        )?;
        q_prime.extend(got);
    }
    log.note("C1.Q'", (k * (2 * k + l0).saturating_sub(2)) as f64, q_prime.len() as f64);
    newly.extend(q_prime.iter().copied());

    // in-fans onto the tails
    let mut q_all = VertexSet::new();
    for &u in &d1_tails {
        let cu = coloring.color_of(u).expect("working vertices are colored");
        let got = grab_and_color(
            phase,
            "C1.Q",
            coloring,
            d.in_list(u),
            k,
            |v| in_e_a_prime(v) || q_prime.contains(&v),
            cu.other(),
        )?;
        q_all.extend(got);
    }
    log.note("C1.Q", (k * (2 * k + l0).saturating_sub(2)) as f64, q_all.len() as f64);
    newly.extend(q_all.iter().copied());

    // the in-fans' own crossing clauses: recolor a core of each color class
    let mut recolored = VertexSet::new();
    for color in [Color::I, Color::II] {
        let q_c: VertexSet = q_all
            .iter()
            .copied()
            .filter(|&v| coloring.color_of(v) == Some(color))
            .collect();
        if q_c.is_empty() {
            continue;
        }
        let sub = d.induced(&q_c).expect("colored vertices are in range");
        let core = core_set(&sub.graph, k, l)
            .map_err(|e| PipelineError::new(phase, "C1.Q-core", e.to_string()))?;
        let members = sub.to_parent_set(&core.members);
        log.note(
            "C1.Q-core",
            scale.apply(50.0 * (k + l) as f64 * lg).max(1.0),
            members.len() as f64,
        );
        for &v in &members {
            coloring.recolor(phase, v, color.other(), RecolorKind::CrossRepair)?;
        }
        recolored.extend(members);
    }

    // repair the tails' incoming different-color support damaged by the swap
    let mut q1 = VertexSet::new();
    for &u in &d1_tails {
        let cu = coloring.color_of(u).expect("colored");
        let have = d
            .in_list(u)
            .iter()
            .filter(|&&w| {
                (q_all.contains(&w) || q1.contains(&w))
                    && coloring.color_of(w) == Some(cu.other())
            })
            .count();
        if have < k {
            let got = grab_and_color(
                phase,
                "C1.Q1",
                coloring,
                d.in_list(u),
                k - have,
                in_e_a_prime,
                cu.other(),
            )?;
            q1.extend(got);
        }
    }
    log.note("C1.Q1", scale.apply(100.0 * (k + l) as f64 * lg).max(1.0), q1.len() as f64);
    newly.extend(q1.iter().copied());

    // fresh out-fans give the swapped cores and the repairs their crossing
    // out-reach
    let mut q2 = VertexSet::new();
    for &v in recolored.union(&q1) {
        let cv = coloring.color_of(v).expect("colored");
        let got = grab_and_color(
            phase,
            "C1.Q2",
            coloring,
            d.out_list(v),
            k,
            in_e_prime,
            cv.other(),
        )?;
        q2.extend(got);
    }
    log.note("C1.Q2", scale.apply(200.0 * f).max(1.0), q2.len() as f64);
    newly.extend(q2.iter().copied());

    // ---- step 2: same-side clauses, one side at a time ----
    let step1_colored: VertexSet = d1_members.union(&newly).copied().collect();
    let w_i_prime: VertexSet = step1_colored
        .iter()
        .copied()
        .filter(|&v| coloring.color_of(v) == Some(Color::I))
        .collect();
    let w_ii_prime: VertexSet = step1_colored
        .iter()
        .copied()
        .filter(|&v| coloring.color_of(v) == Some(Color::II))
        .collect();
    let in_e_dprime = |v: Vertex| {
        req.c_avoid.contains(&v)
            || e_all.contains(&v)
            || w_i_prime.contains(&v)
            || w_ii_prime.contains(&v)
            || d0.contains(&v)
    };
    let in_e_a_dprime = |v: Vertex| {
        req.c_avoid.contains(&v)
            || e_a_set.contains(&v)
            || w_i_prime.contains(&v)
            || w_ii_prime.contains(&v)
            || d0.contains(&v)
    };

    for (side, w_side) in [(Color::I, &w_i_prime), (Color::II, &w_ii_prime)] {
        if w_side.is_empty() {
            continue;
        }
        let sub = d.induced(w_side).expect("colored vertices in range");
        let deficiency = sub.graph.vertex_count() - sub.graph.min_union_degree();
        log.note("C1.W-degree", l as f64, deficiency as f64);
        let l_eff = l.max(deficiency).max(1);
        let r = reach_sets(&sub.graph, k, l_eff)
            .map_err(|e| PipelineError::new(phase, "C1.W-reach", e.to_string()))?;
        let tails = sub.to_parent_set(&r.w_set);

        // same-color in-fans onto the side's reach tails
        let mut w_new = VertexSet::new();
        for &u in &tails {
            let got = grab_and_color(
                phase,
                "C1.W",
                coloring,
                d.in_list(u),
                k,
                in_e_a_dprime,
                side,
            )?;
            w_new.extend(got);
        }
        log.note("C1.W", (k * (2 * k + l).saturating_sub(1)) as f64, w_new.len() as f64);
        newly.extend(w_new.iter().copied());

        // swap a core of the fan across, then repair the tails' same-color
        // support and give the swapped vertices their own out-reach
        let mut u_swapped = VertexSet::new();
        if !w_new.is_empty() {
            let sub_w = d.induced(&w_new).expect("in range");
            let core = core_set(&sub_w.graph, k, l)
                .map_err(|e| PipelineError::new(phase, "C1.U-core", e.to_string()))?;
            u_swapped = sub_w.to_parent_set(&core.members);
            log.note(
                "C1.U",
                scale.apply(6.0 * (k + l) as f64 * lg).max(1.0),
                u_swapped.len() as f64,
            );
            for &v in &u_swapped {
                coloring.recolor(phase, v, side.other(), RecolorKind::SameSideRepair)?;
            }
        }

        let mut u_prime = VertexSet::new();
        for &u in &tails {
            let have = d
                .in_list(u)
                .iter()
                .filter(|&&w| {
                    (w_new.contains(&w) || u_prime.contains(&w))
                        && coloring.color_of(w) == Some(side)
                })
                .count();
            if have < k {
                let got = grab_and_color(
                    phase,
                    "C1.U'",
                    coloring,
                    d.in_list(u),
                    k - have,
                    in_e_a_dprime,
                    side,
                )?;
                u_prime.extend(got);
            }
        }
        log.note("C1.U'", scale.apply(6.0 * (k + l) as f64 * lg).max(1.0), u_prime.len() as f64);
        newly.extend(u_prime.iter().copied());

        let mut u_second = VertexSet::new();
        for &v in u_swapped.union(&u_prime) {
            for color in [Color::I, Color::II] {
                let got = grab_and_color(
                    phase,
                    "C1.U''",
                    coloring,
                    d.out_list(v),
                    k,
                    in_e_dprime,
                    color,
                )?;
                u_second.extend(got);
            }
        }
        log.note("C1.U''", scale.apply(24.0 * f).max(1.0), u_second.len() as f64);
        newly.extend(u_second.iter().copied());

        // out-reach for the whole side through its forward reach set
        let mut final_members: VertexSet = w_new
            .union(w_side)
            .copied()
            .filter(|v| !u_swapped.contains(v))
            .collect();
        final_members.extend(u_prime.iter().copied());
        let sub_f = d.induced(&final_members).expect("in range");
        let deficiency = sub_f.graph.vertex_count() - sub_f.graph.min_union_degree();
        let l_eff = l.max(deficiency).max(1);
        let r2 = reach_sets(&sub_f.graph, k, l_eff)
            .map_err(|e| PipelineError::new(phase, "C1.Wh-reach", e.to_string()))?;
        let heads = sub_f.to_parent_set(&r2.u_set);
        let mut w_prime = VertexSet::new();
        for &u in &heads {
            let cu = coloring.color_of(u).expect("colored");
            let got = grab_and_color(
                phase,
                "C1.W'",
                coloring,
                d.out_list(u),
                k,
                in_e_dprime,
                cu,
            )?;
            w_prime.extend(got);
        }
        log.note("C1.W'", (k * (2 * k + l).saturating_sub(1)) as f64, w_prime.len() as f64);
        newly.extend(w_prime.iter().copied());
    }

    log.note(
        "C1.C'",
        scale.apply((2 * k * req.l_prime) as f64 + 400.0 * f).max(1.0),
        newly.len() as f64,
    );
    Ok(newly)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::vset;
    use crate::engine::Scale;

    fn setup(n: usize) -> (Digraph, Coloring) {
        let d = Digraph::complete(n);
        let coloring = Coloring::new(n);
        (d, coloring)
    }

    #[test]
    fn trivially_safe_outside_frozen_sets() {
        let (d, mut coloring) = setup(12);
        coloring.set("t", 0, Color::I).unwrap();
        coloring.set("t", 1, Color::II).unwrap();
        let ctx = SafetyContext::build(&d, &coloring);
        // no frozen sets: both colored vertices sit inside their own targets
        assert!(is_safe(&ctx, &coloring, 0, 1).unwrap().0);
        assert!(is_safe(&ctx, &coloring, 1, 1).unwrap().0);
        assert!(safe_with_both_colors(&d, &coloring, 5, 1).unwrap());
    }

    #[test]
    fn frozen_vertex_needs_reach() {
        // isolate vertex 0 inside its color class: no outgoing arcs at all
        let mut arcs = Vec::new();
        for u in 1..6usize {
            for v in 1..6usize {
                if u != v {
                    arcs.push((u, v));
                }
            }
            arcs.push((u, 0));
        }
        let d = Digraph::new(6, &arcs).unwrap();
        let mut coloring = Coloring::new(6);
        coloring.d0 = vset([0]);
        for v in 0..6 {
            coloring.set("t", v, Color::I).unwrap();
        }
        let ctx = SafetyContext::build(&d, &coloring);
        let (ok, clause) = is_safe(&ctx, &coloring, 0, 1).unwrap();
        assert!(!ok);
        assert_eq!(clause, Some(Clause::S1));
        // every other vertex is outside the frozen sets and safe
        for v in 1..6 {
            assert!(is_safe(&ctx, &coloring, v, 1).unwrap().0);
        }
    }

    #[test]
    fn closure_empty_working_sets() {
        let (d, mut coloring) = setup(8);
        let params = Parameters::scaled(1, 1, 4, 4, Scale::one());
        let mut log = ClaimLog::default();
        let out = safety_closure(
            &d,
            &params,
            &mut coloring,
            &mut log,
            ClosureRequest {
                phase: "test",
                c_avoid: &vset([]),
                w_i: &vset([]),
                w_ii: &vset([]),
                l_prime: 4,
            },
        )
        .unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn closure_certifies_small_working_sets() {
        let d = Digraph::complete(40);
        let params = Parameters::scaled(1, 1, 20, 20, Scale::one());
        let mut coloring = Coloring::new(40);
        // pretend vertices 0..4 are a frozen family block, colored two ways
        coloring.d0 = vset([0, 1, 2, 3]);
        coloring.set("t", 0, Color::I).unwrap();
        coloring.set("t", 1, Color::I).unwrap();
        coloring.set("t", 2, Color::II).unwrap();
        coloring.set("t", 3, Color::II).unwrap();
        let mut log = ClaimLog::default();
        let newly = safety_closure(
            &d,
            &params,
            &mut coloring,
            &mut log,
            ClosureRequest {
                phase: "test",
                c_avoid: &vset([]),
                w_i: &vset([0, 1]),
                w_ii: &vset([2, 3]),
                l_prime: 4,
            },
        )
        .unwrap();
        assert!(!newly.is_empty());
        sweep(&d, &coloring, 1, "test").unwrap();
    }

    #[test]
    fn closure_rejects_oversized_working_set() {
        let (d, mut coloring) = setup(10);
        for v in 0..4 {
            coloring.set("t", v, Color::I).unwrap();
        }
        let params = Parameters::scaled(1, 1, 5, 5, Scale::one());
        let mut log = ClaimLog::default();
        let err = safety_closure(
            &d,
            &params,
            &mut coloring,
            &mut log,
            ClosureRequest {
                phase: "test",
                c_avoid: &vset([]),
                w_i: &vset([0, 1, 2, 3]),
                w_ii: &vset([]),
                l_prime: 2,
            },
        )
        .unwrap_err();
        assert_eq!(err.claim, "C1.w-budget");
    }
}
