//! The partition pipeline: dominating families, safety-certified coloring,
//! correct index paths, exceptional-set handling, and final assembly of the
//! two parts.
//!
//! The pipeline runs in two modes. Strict mode enforces the astronomically
//! large connectivity gate up front and is therefore expected to abort on any
//! graph a desk can hold. Scaled mode multiplies every derived threshold by a
//! rational scale, keeps every structural invariant as an abort, and records
//! every budget inequality as a pass/fail claim line instead of assuming it.

mod coloring;
mod exceptional;
mod families;
mod long_paths;
mod pipeline;
mod safety;
mod short_paths;

pub use coloring::{Color, Coloring, RecolorKind};
pub use exceptional::{exceptional_coloring, ExceptionLedger};
pub use families::{build_families, initial_coloring, select_xy, FamilyLedger, XySelection};
pub use long_paths::{long_path_phase, PathPlan, Segments, SurgeryPlan};
pub use pipeline::{dominating_phase, finalize, run_pipeline, PipelineFailure, PipelineOutcome, RoutingGadget};
pub use safety::{
    is_safe, safe_with_both_colors, safety_closure, sweep, Clause, ClosureRequest, SafetyContext,
};
pub use short_paths::{correct_parity, short_path_phase, ShortPhaseOutput};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::verify::CertCheck;

/// Exact rational threshold multiplier for scaled mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scale {
    pub num: u64,
    pub den: u64,
}

impl Scale {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(num > 0 && den > 0, "scale must be positive");
        Self { num, den }
    }

    pub fn one() -> Self {
        Self { num: 1, den: 1 }
    }

    pub fn apply(&self, x: f64) -> f64 {
        x * self.num as f64 / self.den as f64
    }

    pub fn ceil_apply(&self, x: f64) -> usize {
        self.apply(x).ceil().max(0.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Strict,
    Scaled,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Strict => "strict",
            Mode::Scaled => "scaled",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    pub k: usize,
    pub l: usize,
    pub n1: usize,
    pub n2: usize,
    pub mode: Mode,
    pub scale: Scale,
    /// Spine cap; defaults per mode when unset.
    pub c: Option<usize>,
    /// Connectivity gate applied to the fan graph in scaled mode.
    pub long_gate: Option<usize>,
    /// Node budget for the exact path searches.
    pub search_budget: u64,
}

impl Parameters {
    pub fn scaled(k: usize, l: usize, n1: usize, n2: usize, scale: Scale) -> Self {
        Self {
            k,
            l,
            n1,
            n2,
            mode: Mode::Scaled,
            scale,
            c: None,
            long_gate: None,
            search_budget: 2_000_000,
        }
    }

    pub fn strict(k: usize, l: usize, n1: usize, n2: usize) -> Self {
        Self {
            k,
            l,
            n1,
            n2,
            mode: Mode::Strict,
            scale: Scale::one(),
            c: None,
            long_gate: None,
            search_budget: 2_000_000,
        }
    }

    pub fn log2_2kl(&self) -> f64 {
        ((2 * self.k * self.l) as f64).log2().max(1.0)
    }

    /// f(k, l) = k (k + l) log2(2 k l).
    pub fn f(&self) -> f64 {
        (self.k * (self.k + self.l)) as f64 * self.log2_2kl()
    }

    pub fn formula_c(&self) -> usize {
        ((18000 * self.k * self.k) as f64).log2().ceil() as usize + 2
    }

    pub fn resolved_c(&self) -> usize {
        self.effective_c(usize::MAX)
    }

    /// Spine cap for a graph whose relevant degree floor is `delta_floor`.
    /// In scaled mode, larger caps mean more halvings and smaller
    /// exceptional sets, so take the largest cap the degree hypothesis
    /// supports, up to the formula value.
    pub fn effective_c(&self, delta_floor: usize) -> usize {
        match self.c {
            Some(c) => c,
            None => match self.mode {
                Mode::Strict => self.formula_c(),
                Mode::Scaled => {
                    let head_room = (delta_floor / (2 * self.l)).max(2);
                    let cap = (head_room as f64).log2().floor() as usize + 1;
                    self.formula_c().min(cap).max(2)
                }
            },
        }
    }
}

/// Integer thresholds shared by the path phases, derived once per run.
/// Structural floors keep the segment layout coherent at any scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Thresholds {
    pub c: usize,
    /// Half window: k + l + 2 vertices per color per window.
    pub window_half: usize,
    /// Full window: 2 (k + l + 2).
    pub window: usize,
    /// Flank segment length per side.
    pub seg: usize,
    /// Maximum vertex count of a short path.
    pub short_cap: usize,
    /// Length cap of the single leftover-index short path family.
    pub single_cap: usize,
    /// Minimum vertex count of a usable long path: both flanks plus ends.
    pub long_min: usize,
    /// Paths requested per leftover index.
    pub fan_total: usize,
    /// Shortest sub-family kept per leftover index.
    pub fan_select: usize,
    /// Paths reserved per leftover index for the final splice.
    pub reserve: usize,
}

impl Thresholds {
    pub fn derive(p: &Parameters) -> Self {
        Self::derive_with_c(p, p.resolved_c())
    }

    pub fn derive_with_c(p: &Parameters, c: usize) -> Self {
        let (k, l) = (p.k, p.l);
        let lg = p.log2_2kl();
        let f = p.f();
        let window_half = k + l + 2;
        let window = 2 * window_half;
        let seg_floor = 2 * window + 4 * (k + l + 1);
        let seg = p
            .scale
            .ceil_apply(600.0 * (k + l) as f64 * lg)
            .max(seg_floor);
        let long_min = 2 + 2 * seg;
        let short_cap = p
            .scale
            .ceil_apply(1200.0 * (k + l) as f64 * lg + 3.0 * l as f64)
            .max(long_min + 3 * l - 2)
            .max(3);
        let single_cap = short_cap - 3 * l + 1;
        let reserve = 5 * l;
        let fan_select = p.scale.ceil_apply(800.0 * f).max(reserve + 1);
        let fan_total = p.scale.ceil_apply(32000.0 * f).max(fan_select);
        Self {
            c,
            window_half,
            window,
            seg,
            short_cap,
            single_cap,
            long_min,
            fan_total,
            fan_select,
            reserve,
        }
    }
}

/// Structured abort: the failing phase, the check id it violated, and a
/// human-readable message. The claim log accumulated so far rides along.
#[derive(Debug, Error)]
#[error("[{phase}] {claim}: {message}")]
pub struct PipelineError {
    pub phase: &'static str,
    pub claim: String,
    pub message: String,
}

impl PipelineError {
    pub fn new(phase: &'static str, claim: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            phase,
            claim: claim.into(),
            message: message.into(),
        }
    }
}

/// Claim-check accumulator. Every recorded line renders as
/// `CLAIM <name> bound=<b> observed=<o> PASS|FAIL`.
#[derive(Debug, Default, Clone)]
pub struct ClaimLog {
    pub checks: Vec<CertCheck>,
}

impl ClaimLog {
    /// Budget inequality (observed <= bound): recorded, never aborts.
    pub fn note(&mut self, name: &str, bound: f64, observed: f64) -> bool {
        let pass = observed <= bound;
        self.checks.push(CertCheck {
            name: name.to_string(),
            bound,
            observed,
            pass,
        });
        pass
    }

    /// Floor inequality (observed >= bound): recorded, never aborts.
    pub fn note_ge(&mut self, name: &str, bound: f64, observed: f64) -> bool {
        let pass = observed >= bound;
        self.checks.push(CertCheck {
            name: name.to_string(),
            bound,
            observed,
            pass,
        });
        pass
    }

    /// Floor invariant: recorded, aborts the phase on failure.
    pub fn gate_ge(
        &mut self,
        phase: &'static str,
        name: &str,
        bound: f64,
        observed: f64,
        message: impl Into<String>,
    ) -> Result<(), PipelineError> {
        if self.note_ge(name, bound, observed) {
            Ok(())
        } else {
            Err(PipelineError::new(phase, name, message))
        }
    }

    /// Structural invariant: recorded, aborts the phase on failure.
    pub fn gate(
        &mut self,
        phase: &'static str,
        name: &str,
        bound: f64,
        observed: f64,
        message: impl Into<String>,
    ) -> Result<(), PipelineError> {
        if self.note(name, bound, observed) {
            Ok(())
        } else {
            Err(PipelineError::new(phase, name, message))
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&c.log_line());
            s.push('\n');
        }
        s
    }
}
