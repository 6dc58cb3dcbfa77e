//! Two-coloring state with a recolor audit trail and phase snapshots.
//!
//! A vertex, once colored, changes color only through the two sanctioned
//! repair moves; anything else is a pipeline bug and errors out loudly.

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::digraph::{Vertex, VertexSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Color {
    I,
    II,
}

impl Color {
    pub fn other(self) -> Color {
        match self {
            Color::I => Color::II,
            Color::II => Color::I,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Color::I => "I",
            Color::II => "II",
        }
    }
}

/// The only two sanctioned recolor moves: the cross-safety repair inside the
/// closure's first step and the same-side repair inside its second step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecolorKind {
    CrossRepair,
    SameSideRepair,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecolorEvent {
    pub vertex: Vertex,
    pub from: Color,
    pub to: Color,
    pub kind: RecolorKind,
}

#[derive(Debug, Clone)]
pub struct Coloring {
    assign: Vec<Option<Color>>,
    /// Frozen context sets used by the safety predicate.
    pub d0: VertexSet,
    pub d0_prime: VertexSet,
    pub e_a: VertexSet,
    pub e_b: VertexSet,
    recolors: Vec<RecolorEvent>,
    snapshots: Vec<(String, VertexSet)>,
}

impl Coloring {
    pub fn new(n: usize) -> Self {
        Self {
            assign: vec![None; n],
            d0: VertexSet::new(),
            d0_prime: VertexSet::new(),
            e_a: VertexSet::new(),
            e_b: VertexSet::new(),
            recolors: Vec::new(),
            snapshots: Vec::new(),
        }
    }

    pub fn color_of(&self, v: Vertex) -> Option<Color> {
        self.assign[v]
    }

    pub fn is_colored(&self, v: Vertex) -> bool {
        self.assign[v].is_some()
    }

    pub fn set(&mut self, phase: &'static str, v: Vertex, color: Color) -> Result<(), PipelineError> {
        match self.assign[v] {
            None => {
                self.assign[v] = Some(color);
                Ok(())
            }
            Some(existing) if existing == color => Ok(()),
            Some(existing) => Err(PipelineError::new(
                phase,
                "recolor-audit",
                format!(
                    "vertex {v} already colored {} (attempted {})",
                    existing.as_str(),
                    color.as_str()
                ),
            )),
        }
    }

    pub fn recolor(
        &mut self,
        phase: &'static str,
        v: Vertex,
        to: Color,
        kind: RecolorKind,
    ) -> Result<(), PipelineError> {
        let from = self.assign[v].ok_or_else(|| {
            PipelineError::new(phase, "recolor-audit", format!("vertex {v} is uncolored"))
        })?;
        if from != to {
            self.assign[v] = Some(to);
            self.recolors.push(RecolorEvent {
                vertex: v,
                from,
                to,
                kind,
            });
        }
        Ok(())
    }

    pub fn recolor_events(&self) -> &[RecolorEvent] {
        &self.recolors
    }

    pub fn colored_set(&self) -> VertexSet {
        self.assign
            .iter()
            .enumerate()
            .filter_map(|(v, c)| c.map(|_| v))
            .collect()
    }

    pub fn set_of(&self, color: Color) -> VertexSet {
        self.assign
            .iter()
            .enumerate()
            .filter_map(|(v, c)| (*c == Some(color)).then_some(v))
            .collect()
    }

    pub fn colored_count(&self) -> usize {
        self.assign.iter().filter(|c| c.is_some()).count()
    }

    /// Records the colored set under a phase label; the pipeline asserts
    /// these grow monotonically.
    pub fn snapshot(&mut self, label: &str) {
        self.snapshots.push((label.to_string(), self.colored_set()));
    }

    pub fn snapshots(&self) -> &[(String, VertexSet)] {
        &self.snapshots
    }

    pub fn check_monotone(&self) -> Result<(), String> {
        for w in self.snapshots.windows(2) {
            let (ref a_name, ref a) = w[0];
            let (ref b_name, ref b) = w[1];
            if !a.is_subset(b) {
                return Err(format!("snapshot {a_name} is not contained in {b_name}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_and_recolor_audit() {
        let mut c = Coloring::new(4);
        c.set("t", 0, Color::I).unwrap();
        assert!(c.set("t", 0, Color::II).is_err());
        c.recolor("t", 0, Color::II, RecolorKind::CrossRepair).unwrap();
        assert_eq!(c.color_of(0), Some(Color::II));
        assert_eq!(c.recolor_events().len(), 1);
        // recolor to the same color is a no-op, not an event
        c.recolor("t", 0, Color::II, RecolorKind::SameSideRepair).unwrap();
        assert_eq!(c.recolor_events().len(), 1);
    }

    #[test]
    fn snapshots_monotone() {
        let mut c = Coloring::new(3);
        c.set("t", 0, Color::I).unwrap();
        c.snapshot("a");
        c.set("t", 1, Color::II).unwrap();
        c.snapshot("b");
        assert!(c.check_monotone().is_ok());
    }
}
