//! Long index paths for the leftover indices: disjoint path fans, local
//! minimality repair, flank segmentation, window colorings, and the splice
//! surgery that manufactures one correct path per leftover index.

use std::collections::{BTreeMap, BTreeSet};

use super::coloring::{Color, Coloring};
use super::families::FamilyLedger;
use super::safety::{safe_with_both_colors, safety_closure, ClosureRequest};
use super::short_paths::{color_index_path, correct_parity, ShortPhaseOutput};
use super::{ClaimLog, Mode, Parameters, PipelineError, Thresholds};
use crate::connectivity::{
    find_disjoint_path_fans_with, is_strongly_k_connected, select_short_subfamily, FanOptions,
    FanStrategy, PathWitness,
};
use crate::digraph::{Digraph, Vertex, VertexSet};
use crate::dominating::core_set;

const PHASE: &str = "long-paths";

/// Path bookkeeping for both phases: the short family, the selected long
/// fans with their window classification, and the final per-index paths.
#[derive(Debug, Default, Clone)]
pub struct PathPlan {
    pub short_family: BTreeMap<usize, PathWitness>,
    pub incorrect_multi: BTreeMap<usize, Vec<PathWitness>>,
    pub incorrect_single: BTreeMap<usize, PathWitness>,
    pub leftover: Vec<usize>,
    /// Selected long paths keyed by (index, rank); ranks start at 1.
    pub long: BTreeMap<(usize, usize), PathWitness>,
    pub l1: BTreeSet<(usize, usize)>,
    pub l2: BTreeSet<(usize, usize)>,
    pub l3: BTreeSet<(usize, usize)>,
    pub l4: BTreeSet<(usize, usize)>,
    pub p_first: VertexSet,
    pub p_second: VertexSet,
    pub u_windows: BTreeMap<(usize, usize, u8), Vec<Vertex>>,
    pub v_windows: BTreeMap<(usize, usize, u8), Vec<Vertex>>,
    pub final_paths: BTreeMap<usize, PathWitness>,
    pub surgeries: Vec<SurgeryPlan>,
}

impl PathPlan {
    pub fn from_short(out: ShortPhaseOutput) -> Self {
        PathPlan {
            short_family: out.family,
            incorrect_multi: out.incorrect_multi,
            incorrect_single: out.incorrect_single,
            leftover: out.leftover,
            ..Default::default()
        }
    }

    /// The full index-path per index, short or manufactured.
    pub fn index_path(&self, i1: usize) -> Option<&PathWitness> {
        self.short_family.get(&i1).or_else(|| self.final_paths.get(&i1))
    }

    /// Vertices of every selected long path.
    pub fn long_vertex_union(&self) -> VertexSet {
        self.long
            .values()
            .flat_map(|p| p.vertices.iter().copied())
            .collect()
    }
}

/// Record of one splice: which ranked paths contributed the prefix, middle,
/// and suffix, the even jump offset, and the two junction arcs used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurgeryPlan {
    pub index: usize,
    pub j1: usize,
    pub j2: usize,
    pub j3: usize,
    pub j4: Option<usize>,
    pub gamma: usize,
    pub junctions: [(Vertex, Vertex); 2],
}

/// Interior segment boundaries of a long path under the given thresholds.
/// Positions index the full vertex sequence, so position 0 is the tail
/// endpoint and `interior_len + 1` the head endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segments {
    pub interior_len: usize,
    pub seg: usize,
    pub window: usize,
}

impl Segments {
    pub fn of(path: &PathWitness, th: &Thresholds) -> Option<Segments> {
        let m = path.length().checked_sub(2)?;
        if m < 2 * th.seg {
            return None;
        }
        Some(Segments {
            interior_len: m,
            seg: th.seg,
            window: th.window,
        })
    }

    pub fn p1(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.seg
    }

    pub fn p2(&self) -> std::ops::RangeInclusive<usize> {
        (self.seg + 1)..=(self.interior_len - self.seg)
    }

    pub fn p3(&self) -> std::ops::RangeInclusive<usize> {
        (self.interior_len - self.seg + 1)..=self.interior_len
    }

    pub fn p11(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.window
    }

    pub fn p12(&self) -> std::ops::RangeInclusive<usize> {
        (self.window + 1)..=(self.seg - self.window)
    }

    pub fn p13(&self) -> std::ops::RangeInclusive<usize> {
        (self.seg - self.window + 1)..=self.seg
    }

    pub fn p31(&self) -> std::ops::RangeInclusive<usize> {
        (self.interior_len - self.seg + 1)..=(self.interior_len - self.seg + self.window)
    }

    pub fn p32(&self) -> std::ops::RangeInclusive<usize> {
        (self.interior_len - self.seg + self.window + 1)..=(self.interior_len - self.window)
    }

    pub fn p33(&self) -> std::ops::RangeInclusive<usize> {
        (self.interior_len - self.window + 1)..=self.interior_len
    }

    /// First interior position after the opening window; the splice jumps
    /// from here.
    pub fn jump_source_pos(&self) -> usize {
        self.window + 1
    }

    /// Last position of the closing middle sub-segment; the splice lands
    /// back on the path here.
    pub fn landing_pos(&self) -> usize {
        self.interior_len - self.window
    }
}

fn positions(path: &PathWitness, range: std::ops::RangeInclusive<usize>) -> Vec<Vertex> {
    range.map(|t| path.vertices[t]).collect()
}

#[allow(clippy::too_many_arguments)]
pub fn long_path_phase(
    d: &Digraph,
    params: &Parameters,
    th: &Thresholds,
    ledger: &FamilyLedger,
    plan: &mut PathPlan,
    coloring: &mut Coloring,
    log: &mut ClaimLog,
    provenance: &mut Vec<String>,
) -> Result<(), PipelineError> {
    let (k, l) = (params.k, params.l);
    let scale = params.scale;
    let f = params.f();
    let lg = params.log2_2kl();
    let c2_set = coloring.colored_set();
    let leftover = plan.leftover.clone();
    assert!(!leftover.is_empty());

    // working graph: everything uncolored plus the leftover terminals
    let mut members: VertexSet = d.vertices().filter(|v| !coloring.is_colored(*v)).collect();
    for &i1 in &leftover {
        members.insert(ledger.a(i1));
        members.insert(ledger.b(i1));
    }
    let sub = d
        .induced(&members)
        .map_err(|e| PipelineError::new(PHASE, "long-graph", e.to_string()))?;

    let gate_k = match params.mode {
        Mode::Strict => (96e5 * (k + l) as f64 * f) as usize,
        Mode::Scaled => params.long_gate.unwrap_or(k).max(1),
    };
    let (gate_ok, _) = is_strongly_k_connected(&sub.graph, gate_k)
        .map_err(|e| PipelineError::new(PHASE, "long-gate", e.to_string()))?;
    log.gate(
        PHASE,
        "long-gate",
        0.0,
        if gate_ok { 0.0 } else { 1.0 },
        format!("fan graph is not strongly {gate_k}-connected"),
    )?;

    // one fan of internally disjoint paths per leftover index
    let pairs: Vec<(Vertex, Vertex)> = leftover
        .iter()
        .map(|&i1| {
            (
                sub.local(ledger.b(i1)).expect("terminal in working graph"),
                sub.local(ledger.a(i1)).expect("terminal in working graph"),
            )
        })
        .collect();
    let strategy = if sub.graph.vertex_count() <= 64 {
        FanStrategy::Exact
    } else {
        FanStrategy::Heuristic
    };
    provenance.push(format!(
        "long-path fans search-derived ({})",
        match strategy {
            FanStrategy::Exact => "exact",
            FanStrategy::Heuristic => "heuristic shortest-path peeling, validated",
        }
    ));
    let fan = find_disjoint_path_fans_with(
        &sub.graph,
        &pairs,
        th.fan_total,
        &VertexSet::new(),
        FanOptions {
            strategy,
            budget: params.search_budget,
        },
    )
    .map_err(|e| PipelineError::new(PHASE, "P2i", e.to_string()))?;

    let selected = select_short_subfamily(&fan, th.fan_select)
        .map_err(|e| PipelineError::new(PHASE, "P2ii", e.to_string()))?;
    log.gate(
        PHASE,
        "P2ii",
        (th.fan_select * fan.interior_size()) as f64,
        (selected.interior_size() * th.fan_total) as f64,
        "selected sub-family exceeds its interior share",
    )?;
    log.note("EQ16", d.vertex_count() as f64 / 40.0, selected.interior_size() as f64);

    // back to parent ids, keyed by (index, rank)
    let mut long: BTreeMap<(usize, usize), PathWitness> = BTreeMap::new();
    for (pi, &i1) in leftover.iter().enumerate() {
        for (j0, p) in selected.paths[pi].iter().enumerate() {
            let parent = PathWitness::new(p.vertices.iter().map(|&v| sub.parent(v)).collect());
            long.insert((i1, j0 + 1), parent);
        }
    }

    // local minimality: contract shortcuts, splice outside detours, repeat
    let outside_pool: VertexSet = members
        .iter()
        .copied()
        .filter(|&v| !coloring.is_colored(v))
        .collect();
    minimality_repair(d, &mut long, &outside_pool);
    verify_a1_a2(d, &long, &outside_pool, log)?;

    for ((i1, j), p) in &long {
        log.gate_ge(
            PHASE,
            "EQ13",
            th.long_min as f64,
            p.length() as f64,
            format!("path ({i1},{j}) shorter than the segment layout needs"),
        )?;
    }
    // the middle sub-segment keeps its guaranteed slack by construction
    log.note_ge(
        "EQ17",
        (4 * (k + l + 1)) as f64,
        (th.seg - 2 * th.window) as f64,
    );
    plan.long = long;

    // reserve the splice material first: the first `reserve` ranks per
    // leftover index, protected from every later grab, so the final paths
    // always have fresh interiors to draw on
    for &i1 in &leftover {
        for j in 1..=th.reserve.min(th.fan_select) {
            plan.l3.insert((i1, j));
        }
    }
    let reserved_vertices: VertexSet = plan
        .l3
        .iter()
        .flat_map(|key| plan.long[key].interior().iter().copied())
        .collect();

    // flank core sets, drawn from the non-reserved paths
    let mut flank = VertexSet::new();
    for (key, p) in &plan.long {
        if plan.l3.contains(key) {
            continue;
        }
        let segs = Segments::of(p, th).expect("length gated");
        flank.extend(positions(p, segs.p1()));
        flank.extend(positions(p, segs.p3()));
    }
    let fsub = d.induced(&flank).expect("in range");
    let core1 = core_set(&fsub.graph, k, l)
        .map_err(|e| PipelineError::new(PHASE, "C4.PI", e.to_string()))?;
    plan.p_first = fsub.to_parent_set(&core1.members);
    let rest: VertexSet = flank.difference(&plan.p_first).copied().collect();
    let rsub = d.induced(&rest).expect("in range");
    let core2 = core_set(&rsub.graph, k, l)
        .map_err(|e| PipelineError::new(PHASE, "C4.PII", e.to_string()))?;
    plan.p_second = rsub.to_parent_set(&core2.members);
    log.note("C4.PI", scale.apply(90.0 * (k + l) as f64 * lg).max(1.0), plan.p_first.len() as f64);
    log.note("C4.PII", scale.apply(90.0 * (k + l) as f64 * lg).max(1.0), plan.p_second.len() as f64);
    let coverage_gaps = |material: &VertexSet| -> usize {
        let mut bad = 0usize;
        for &v in material {
            if plan.p_first.contains(&v) || plan.p_second.contains(&v) {
                continue;
            }
            for target in [&plan.p_first, &plan.p_second] {
                let outs = d.out_list(v).iter().filter(|u| target.contains(u)).count();
                let ins = d.in_list(v).iter().filter(|u| target.contains(u)).count();
                if outs < k || ins < k {
                    bad += 1;
                }
            }
        }
        bad
    };
    // guaranteed on the material the cores were built from; sweeps certify
    // the reserved flanks directly once they are colored
    log.gate(
        PHASE,
        "C4.cover",
        0.0,
        coverage_gaps(&flank) as f64,
        "flank coverage gaps in the core material",
    )?;
    let mut all_flank = flank.clone();
    for (key, p) in &plan.long {
        if !plan.l3.contains(key) {
            continue;
        }
        let segs = Segments::of(p, th).expect("length gated");
        all_flank.extend(positions(p, segs.p1()));
        all_flank.extend(positions(p, segs.p3()));
    }
    log.note("C4.cover-all", 0.0, coverage_gaps(&all_flank) as f64);

    // first window family: non-reserved pairs whose path touches a core set
    let core_union: VertexSet = plan.p_first.union(&plan.p_second).copied().collect();
    for (&(i1, j), p) in &plan.long {
        if plan.l3.contains(&(i1, j)) {
            continue;
        }
        if p.vertices.iter().any(|v| core_union.contains(v)) {
            plan.l1.insert((i1, j));
        }
    }
    let mut u_window_vertices = VertexSet::new();
    for &(i1, j) in &plan.l1.clone() {
        let p = &plan.long[&(i1, j)];
        let segs = Segments::of(p, th).unwrap();
        for (alpha, range) in [(1u8, segs.p1()), (3u8, segs.p3())] {
            let picked: Vec<Vertex> = range
                .map(|t| p.vertices[t])
                .filter(|v| !core_union.contains(v))
                .take(th.window)
                .collect();
            log.gate_ge(
                PHASE,
                "EQ12.pool",
                th.window as f64,
                picked.len() as f64,
                format!("window pool of ({i1},{j}) side {alpha} too small"),
            )?;
            u_window_vertices.extend(picked.iter().copied());
            plan.u_windows.insert((i1, j, alpha), picked);
        }
    }
    log.note(
        "EQ12",
        scale.apply(2e3 * ((k + l) * (k + l)) as f64 * lg).max(1.0),
        u_window_vertices.len() as f64,
    );

    // color the core sets and certify them through the closure
    for &v in &plan.p_first {
        coloring.set(PHASE, v, Color::I)?;
    }
    for &v in &plan.p_second {
        coloring.set(PHASE, v, Color::II)?;
    }
    let mut c_avoid: VertexSet = c2_set.clone();
    c_avoid.extend(u_window_vertices.iter().copied());
    c_avoid.extend(reserved_vertices.iter().copied());
    let l_prime = (90.0 * (k + l) as f64 * lg).ceil() as usize;
    let closure_new = safety_closure(
        d,
        params,
        coloring,
        log,
        ClosureRequest {
            phase: PHASE,
            c_avoid: &c_avoid,
            w_i: &plan.p_first.clone(),
            w_ii: &plan.p_second.clone(),
            l_prime: l_prime.max(plan.p_first.len()).max(plan.p_second.len()),
        },
    )?;
    log.note("C7.C3'", scale.apply(580.0 * f).max(1.0), closure_new.len() as f64);
    log.note(
        "C7.C3",
        scale.apply(3e4 * (k + l) as f64 * f).max(1.0),
        coloring.colored_count() as f64,
    );
    coloring.snapshot("C3");

    // second window family: non-reserved pairs touched by the repair sets
    for (&(i1, j), p) in &plan.long {
        if plan.l3.contains(&(i1, j)) {
            continue;
        }
        if p.vertices.iter().any(|v| closure_new.contains(v)) {
            plan.l2.insert((i1, j));
        }
    }
    for &(i1, j) in &plan.l2.clone() {
        let p = &plan.long[&(i1, j)];
        let segs = Segments::of(p, th).unwrap();
        for (alpha, range) in [(1u8, segs.p1()), (3u8, segs.p3())] {
            let picked: Vec<Vertex> = range
                .map(|t| p.vertices[t])
                .filter(|v| {
                    !closure_new.contains(v)
                        && !core_union.contains(v)
                        && !u_window_vertices.contains(v)
                })
                .take(th.window)
                .collect();
            log.gate_ge(
                PHASE,
                "EQ14.pool",
                th.window as f64,
                picked.len() as f64,
                format!("second window pool of ({i1},{j}) side {alpha} too small"),
            )?;
            plan.v_windows.insert((i1, j, alpha), picked);
        }
    }
    let v_window_count: usize = plan.v_windows.values().map(|w| w.len()).sum();
    log.note("EQ14", scale.apply(5e3 * (k + l) as f64 * f).max(1.0), v_window_count as f64);

    // balanced window coloring
    for w in plan.u_windows.values().chain(plan.v_windows.values()) {
        for (idx, &v) in w.iter().enumerate() {
            let color = if idx % 2 == 0 { Color::I } else { Color::II };
            coloring.set(PHASE, v, color)?;
        }
    }
    log.note(
        "C5.C4",
        scale.apply(4e4 * (k + l) as f64 * f).max(1.0),
        coloring.colored_count() as f64,
    );
    coloring.snapshot("C4");

    // the protected reserve must have stayed fresh through the window work
    for &i1 in &leftover {
        let fresh = plan
            .l3
            .iter()
            .filter(|&&(i, j)| {
                i == i1
                    && plan.long[&(i, j)]
                        .interior()
                        .iter()
                        .all(|&v| !coloring.is_colored(v))
            })
            .count();
        log.gate_ge(
            PHASE,
            "C8.reserve",
            th.reserve.min(th.fan_select) as f64,
            fresh as f64,
            format!("index {i1} lost reserved paths to coloring"),
        )?;
    }
    for &(i1, j) in plan.long.keys() {
        if !plan.l1.contains(&(i1, j))
            && !plan.l2.contains(&(i1, j))
            && !plan.l3.contains(&(i1, j))
        {
            plan.l4.insert((i1, j));
        }
    }

    // one correct path per leftover index: take a reserved one if some has
    // the right parity, otherwise splice prefix, middle, and suffix from
    // three reserved paths across the two junction arcs
    for &i1 in &leftover {
        let reserved: Vec<usize> = plan
            .l3
            .iter()
            .filter(|&&(i, _)| i == i1)
            .map(|&(_, j)| j)
            .collect();
        let direct = reserved
            .iter()
            .copied()
            .find(|&j| correct_parity(i1, k, plan.long[&(i1, j)].length()));
        if let Some(j) = direct {
            plan.final_paths.insert(i1, plan.long[&(i1, j)].clone());
            continue;
        }
        let (path, surgery) = splice_correct_path(d, th, k, i1, &reserved, &plan.long)
            .ok_or_else(|| {
                PipelineError::new(PHASE, "B1B2", format!("no junction splice for index {i1}"))
            })?;
        debug_assert!(path.validate(d));
        plan.final_paths.insert(i1, path.clone());
        plan.surgeries.push(surgery);
    }

    // color the final paths, the reserved flank patterns, and the leftover
    // flank alternations
    for &i1 in &leftover {
        let path = plan.final_paths[&i1].clone();
        color_index_path(coloring, k, i1, &path, PHASE)?;
    }
    for &(i1, j) in &plan.l3 {
        let p = plan.long[&(i1, j)].clone();
        let segs = Segments::of(&p, th).unwrap();
        for range in [segs.p11(), segs.p33()] {
            let verts = positions(&p, range);
            let mut count_i = verts
                .iter()
                .filter(|&&v| coloring.color_of(v) == Some(Color::I))
                .count();
            let mut count_ii = verts
                .iter()
                .filter(|&&v| coloring.color_of(v) == Some(Color::II))
                .count();
            for &v in &verts {
                if coloring.is_colored(v) {
                    continue;
                }
                let color = if count_i <= count_ii { Color::I } else { Color::II };
                coloring.set(PHASE, v, color)?;
                match color {
                    Color::I => count_i += 1,
                    Color::II => count_ii += 1,
                }
            }
            log.note(
                "C10.window-balance",
                th.window_half as f64,
                count_i.max(count_ii) as f64,
            );
        }
        for &v in positions(&p, segs.p12()).iter().chain(positions(&p, segs.p32()).iter()) {
            if !coloring.is_colored(v) {
                coloring.set(PHASE, v, Color::I)?;
            }
        }
        for &v in positions(&p, segs.p13()).iter().chain(positions(&p, segs.p31()).iter()) {
            if !coloring.is_colored(v) {
                coloring.set(PHASE, v, Color::II)?;
            }
        }
    }
    for &(i1, j) in &plan.l4 {
        let p = plan.long[&(i1, j)].clone();
        let segs = Segments::of(&p, th).unwrap();
        for range in [segs.p11(), segs.p33()] {
            for (idx, t) in range.enumerate() {
                let color = if idx % 2 == 0 { Color::I } else { Color::II };
                coloring.set(PHASE, p.vertices[t], color)?;
            }
        }
    }

    // every middle-segment vertex still uncolored must tolerate either color
    let mut p2_bad = 0usize;
    for p in plan.long.values() {
        let segs = Segments::of(p, th).unwrap();
        for t in segs.p2() {
            let v = p.vertices[t];
            if !coloring.is_colored(v) && !safe_with_both_colors(d, coloring, v, k)? {
                p2_bad += 1;
            }
        }
    }
    log.gate(PHASE, "C10.P2-both", 0.0, p2_bad as f64, "middle vertices not two-way safe")?;

    let colored = coloring.colored_set();
    log.note(
        "C10.C5",
        scale.apply(4e4 * (k + l) as f64 * f).max(1.0) + d.vertex_count() as f64 / 40.0,
        colored.len() as f64,
    );
    let mut discount = VertexSet::new();
    for &(i1, j) in &plan.l3 {
        let p = &plan.long[&(i1, j)];
        let segs = Segments::of(p, th).unwrap();
        discount.extend(positions(p, segs.p2()));
    }
    for &(i1, j) in &plan.l4 {
        let p = &plan.long[&(i1, j)];
        let segs = Segments::of(p, th).unwrap();
        discount.extend(positions(p, segs.p11()));
        discount.extend(positions(p, segs.p33()));
    }
    log.note(
        "C10.C5minus",
        scale.apply(8e4 * (k + l) as f64 * f).max(1.0),
        colored.difference(&discount).count() as f64,
    );
    Ok(())
}

/// Shortcut contraction plus outside-vertex detours until no improvement
/// remains; each step strictly reduces total length, so this terminates.
fn minimality_repair(
    d: &Digraph,
    long: &mut BTreeMap<(usize, usize), PathWitness>,
    outside_pool: &VertexSet,
) {
    let mut outside: VertexSet = outside_pool.clone();
    for p in long.values() {
        for &v in &p.vertices {
            outside.remove(&v);
        }
    }
    loop {
        let mut changed = false;
        for p in long.values_mut() {
            // contract the first shortcut arc, preferring the longest jump
            'contract: loop {
                let len = p.vertices.len();
                for s in 0..len {
                    for t in (s + 2..len).rev() {
                        if d.has_arc(p.vertices[s], p.vertices[t]) {
                            for &v in &p.vertices[s + 1..t] {
                                outside.insert(v);
                            }
                            let mut next = p.vertices[..=s].to_vec();
                            next.extend_from_slice(&p.vertices[t..]);
                            p.vertices = next;
                            changed = true;
                            continue 'contract;
                        }
                    }
                }
                break;
            }
        }
        // detour: an outside vertex that re-enters a path three or more
        // positions later than something it is fed by shortens the path
        let mut splice: Option<((usize, usize), usize, usize, Vertex)> = None;
        'outer: for (&key, p) in long.iter() {
            for &u in outside.iter() {
                let t_in = p.vertices.iter().position(|&w| d.has_arc(u, w));
                if let Some(t_in) = t_in {
                    if t_in >= 3 {
                        if let Some(pfrom) =
                            (0..=t_in - 3).find(|&s| d.has_arc(p.vertices[s], u))
                        {
                            splice = Some((key, pfrom, t_in, u));
                            break 'outer;
                        }
                    }
                }
            }
        }
        if let Some((key, s, t, u)) = splice {
            let p = long.get_mut(&key).unwrap();
            for &v in &p.vertices[s + 1..t] {
                outside.insert(v);
            }
            let mut next = p.vertices[..=s].to_vec();
            next.push(u);
            next.extend_from_slice(&p.vertices[t..]);
            p.vertices = next;
            outside.remove(&u);
            changed = true;
        }
        if !changed {
            break;
        }
    }
}

/// Post-repair structural facts: no forward shortcut survives inside any
/// path, and no outside vertex still offers a shortening detour in either
/// direction.
fn verify_a1_a2(
    d: &Digraph,
    long: &BTreeMap<(usize, usize), PathWitness>,
    outside_pool: &VertexSet,
    log: &mut ClaimLog,
) -> Result<(), PipelineError> {
    let mut a1_bad = 0usize;
    for p in long.values() {
        let len = p.vertices.len();
        for s in 0..len {
            for t in s + 2..len {
                if d.has_arc(p.vertices[s], p.vertices[t]) {
                    a1_bad += 1;
                }
            }
        }
    }
    log.gate(PHASE, "A1", 0.0, a1_bad as f64, "forward shortcuts survive repair")?;

    let mut outside: VertexSet = outside_pool.clone();
    for p in long.values() {
        for &v in &p.vertices {
            outside.remove(&v);
        }
    }
    let mut a2_bad = 0usize;
    for p in long.values() {
        for &u in &outside {
            if let Some(t_in) = p.vertices.iter().position(|&w| d.has_arc(u, w)) {
                if t_in >= 3 && (0..=t_in - 3).any(|s| d.has_arc(p.vertices[s], u)) {
                    a2_bad += 1;
                }
            }
            if let Some(t_out) = p.vertices.iter().rposition(|&w| d.has_arc(w, u)) {
                if t_out + 3 < p.vertices.len()
                    && (t_out + 3..p.vertices.len()).any(|q| d.has_arc(u, p.vertices[q]))
                {
                    a2_bad += 1;
                }
            }
        }
    }
    log.gate(PHASE, "A2", 0.0, a2_bad as f64, "outside detours survive repair")?;
    Ok(())
}

/// Splice search: prefix of one reserved path, middle of a second entered
/// at an even offset (flipping parity), suffix of a third. Returns the
/// composed path and the surgery record.
fn splice_correct_path(
    d: &Digraph,
    th: &Thresholds,
    k: usize,
    i1: usize,
    reserved: &[usize],
    long: &BTreeMap<(usize, usize), PathWitness>,
) -> Option<(PathWitness, SurgeryPlan)> {
    for &j1 in reserved {
        let p1 = &long[&(i1, j1)];
        let s1 = Segments::of(p1, th)?;
        let src = p1.vertices[s1.jump_source_pos()];
        for &j2 in reserved {
            if j2 == j1 {
                continue;
            }
            let p2 = &long[&(i1, j2)];
            let s2 = Segments::of(p2, th)?;
            let max_gamma = s2.landing_pos().checked_sub(s2.window)?;
            let mut gamma = 2usize;
            while gamma <= max_gamma {
                let dst_pos = s2.window + gamma;
                let dst = p2.vertices[dst_pos];
                if d.has_arc(src, dst) {
                    for &j3 in reserved {
                        if j3 == j2 {
                            continue;
                        }
                        let p3 = &long[&(i1, j3)];
                        let s3 = Segments::of(p3, th)?;
                        let from_last = p2.vertices[s2.landing_pos()];
                        let to_last = p3.vertices[s3.landing_pos()];
                        if !d.has_arc(from_last, to_last) {
                            continue;
                        }
                        let mut vertices = p1.vertices[..=s1.jump_source_pos()].to_vec();
                        vertices.extend_from_slice(&p2.vertices[dst_pos..=s2.landing_pos()]);
                        vertices.extend_from_slice(&p3.vertices[s3.landing_pos()..]);
                        if !correct_parity(i1, k, vertices.len()) {
                            continue;
                        }
                        let distinct: VertexSet = vertices.iter().copied().collect();
                        if distinct.len() != vertices.len() {
                            continue;
                        }
                        let path = PathWitness::new(vertices);
                        if !path.validate(d) {
                            continue;
                        }
                        return Some((
                            path,
                            SurgeryPlan {
                                index: i1,
                                j1,
                                j2,
                                j3,
                                j4: None,
                                gamma,
                                junctions: [(src, dst), (from_last, to_last)],
                            },
                        ));
                    }
                }
                gamma += 2;
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Scale;

    fn tiny_thresholds() -> (Parameters, Thresholds) {
        let p = Parameters::scaled(1, 1, 10, 10, Scale::new(1, 100_000));
        let th = Thresholds::derive(&p);
        (p, th)
    }

    #[test]
    fn segment_arithmetic() {
        let (p, th) = tiny_thresholds();
        // seg = 28, window = 8, long_min = 58 for k = l = 1 at floor scale
        assert_eq!(th.seg, 28);
        assert_eq!(th.window, 8);
        let path = PathWitness::new((0..th.long_min).collect());
        let segs = Segments::of(&path, &th).unwrap();
        assert_eq!(segs.p1(), 1..=28);
        assert_eq!(segs.p3(), 29..=56);
        assert!(segs.p2().is_empty());
        assert_eq!(segs.p11(), 1..=8);
        assert_eq!(segs.p12(), 9..=20);
        assert_eq!(segs.p13(), 21..=28);
        assert_eq!(segs.p33(), 49..=56);
        // the middle sub-segment keeps its guaranteed slack
        assert!(segs.p12().count() >= 4 * (p.k + p.l + 1));
        assert_eq!(segs.jump_source_pos(), 9);
        assert_eq!(segs.landing_pos(), 48);
    }

    #[test]
    fn splice_flips_parity() {
        let (_, th) = tiny_thresholds();
        // three parallel even-length chains 0 -> ... -> 1 of interior 60,
        // plus the two junction arcs the splice needs with an even offset
        let interior = 60usize;
        let mut arcs = Vec::new();
        let chain = |c: usize| -> Vec<usize> {
            (0..interior).map(|t| 2 + c * interior + t).collect()
        };
        for c in 0..3 {
            let verts = chain(c);
            arcs.push((0, verts[0]));
            for w in verts.windows(2) {
                arcs.push((w[0], w[1]));
            }
            arcs.push((*verts.last().unwrap(), 1));
        }
        let segs_probe = Segments {
            interior_len: interior,
            seg: th.seg,
            window: th.window,
        };
        let jump_src = chain(0)[segs_probe.jump_source_pos() - 1];
        let gamma = 2usize;
        let jump_dst = chain(1)[segs_probe.window + gamma - 1];
        arcs.push((jump_src, jump_dst));
        let landing_from = chain(1)[segs_probe.landing_pos() - 1];
        let landing_to = chain(2)[segs_probe.landing_pos() - 1];
        arcs.push((landing_from, landing_to));
        let d = Digraph::new(2 + 3 * interior, &arcs).unwrap();

        let mut long = BTreeMap::new();
        for c in 0..3 {
            let mut verts = vec![0];
            verts.extend(chain(c));
            verts.push(1);
            long.insert((3usize, c + 1), PathWitness::new(verts));
        }
        // index 3 needs odd length; each chain path has length 62 (even)
        let reserved = vec![1, 2, 3];
        let (path, surgery) = splice_correct_path(&d, &th, 1, 3, &reserved, &long).unwrap();
        assert!(path.validate(&d));
        assert_eq!(path.length() % 2, 1);
        assert_eq!(surgery.gamma % 2, 0);
        assert_eq!(surgery.j1, 1);
        assert_eq!(surgery.j2, 2);
        assert_eq!(surgery.j3, 3);
    }

    #[test]
    fn repair_contracts_shortcuts_and_detours() {
        // path 0 -> 2 -> 3 -> 4 -> 1 with a shortcut 2 -> 4
        let arcs = vec![(0, 2), (2, 3), (3, 4), (4, 1), (2, 4)];
        let d = Digraph::new(5, &arcs).unwrap();
        let mut long = BTreeMap::new();
        long.insert((1usize, 1usize), PathWitness::new(vec![0, 2, 3, 4, 1]));
        let mut log = ClaimLog::default();
        minimality_repair(&d, &mut long, &VertexSet::new());
        assert_eq!(long[&(1, 1)].vertices, vec![0, 2, 4, 1]);
        verify_a1_a2(&d, &long, &VertexSet::new(), &mut log).unwrap();

        // detour: outside vertex 9 shortens 0 -> 2 -> 3 -> 4 -> 5 -> 1
        let arcs = vec![
            (0, 2),
            (2, 3),
            (3, 4),
            (4, 5),
            (5, 1),
            (2, 9),
            (9, 5),
        ];
        let d = Digraph::new(10, &arcs).unwrap();
        let mut long = BTreeMap::new();
        long.insert((1usize, 1usize), PathWitness::new(vec![0, 2, 3, 4, 5, 1]));
        let outside: VertexSet = [9].into_iter().collect();
        let mut log = ClaimLog::default();
        minimality_repair(&d, &mut long, &outside);
        assert_eq!(long[&(1, 1)].vertices, vec![0, 2, 9, 5, 1]);
        verify_a1_a2(&d, &long, &outside, &mut log).unwrap();
    }
}
