//! Independent verification of bipartitions and the serializable
//! certificate record.
//!
//! Verification shares only the digraph and connectivity primitives with the
//! construction pipeline: it re-derives the three subgraphs from scratch and
//! runs the exact k-connectivity queries on them, so feeding it engine output
//! and feeding it brute-force output exercises the identical code path.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::connectivity::{is_strongly_k_connected, SeparatorWitness};
use crate::digraph::{Digraph, Vertex, VertexSet};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("parts overlap at vertex {0}")]
    Overlap(Vertex),
    #[error("vertex {0} out of range (n={1})")]
    OutOfRange(Vertex, usize),
    #[error("part must be nonempty")]
    EmptyPart,
    #[error("size guard: n = {n} exceeds brute-force limit {max}")]
    SizeGuard { n: usize, max: usize },
    #[error("bad certificate: {0}")]
    BadCertificate(String),
    #[error("certificate json: {0}")]
    Json(#[from] serde_json::Error),
}

/// One named check line: `observed` compared against `bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertCheck {
    pub name: String,
    pub bound: f64,
    pub observed: f64,
    pub pass: bool,
}

impl CertCheck {
    pub fn log_line(&self) -> String {
        format!(
            "CLAIM {} bound={} observed={} {}",
            self.name,
            self.bound,
            self.observed,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedWitness {
    pub check: String,
    pub separator: SeparatorWitness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertParams {
    pub k: usize,
    pub l: usize,
    pub n1: usize,
    pub n2: usize,
    pub mode: String,
    pub scale_num: u64,
    pub scale_den: u64,
}

/// Serializable verification record. Vertex sets are sorted id arrays and
/// the field order is fixed, so byte-identical runs diff cleanly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionCertificate {
    pub graph_hash: String,
    pub params: CertParams,
    pub v1: Vec<Vertex>,
    pub v2: Vec<Vertex>,
    pub accepted: bool,
    pub checks: Vec<CertCheck>,
    pub witnesses: Vec<NamedWitness>,
    pub provenance: Vec<String>,
}

impl PartitionCertificate {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificate serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self, VerifyError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn pass_vector(&self) -> Vec<bool> {
        self.checks.iter().map(|c| c.pass).collect()
    }
}

/// FNV-1a over the vertex count and the sorted arc list; independent of the
/// arc order the graph was built from.
pub fn graph_hash(d: &Digraph) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut feed = |x: u64| {
        for b in x.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    };
    feed(d.vertex_count() as u64);
    for (u, v) in d.arcs() {
        feed(u as u64);
        feed(v as u64);
    }
    format!("{h:016x}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CertCheck>,
    pub witnesses: Vec<NamedWitness>,
    pub accepted: bool,
}

fn subgraph_check(
    name: &str,
    sub: &crate::digraph::SubDigraph,
    k: usize,
) -> (CertCheck, Option<NamedWitness>) {
    let n = sub.graph.vertex_count();
    let (ok, witness) = is_strongly_k_connected(&sub.graph, k).expect("k >= 1");
    let observed = if ok {
        k as f64
    } else {
        match &witness {
            Some(w) => w.cut.len() as f64,
            None => (n.saturating_sub(1)) as f64,
        }
    };
    let check = CertCheck {
        name: name.to_string(),
        bound: k as f64,
        observed,
        pass: ok,
    };
    let named = witness.map(|w| NamedWitness {
        check: name.to_string(),
        separator: SeparatorWitness {
            cut: sub.to_parent_set(&w.cut),
            side_a: sub.to_parent_set(&w.side_a),
            side_b: sub.to_parent_set(&w.side_b),
        },
    });
    (check, named)
}

/// The three-subgraph verification: both induced parts and the crossing
/// subgraph must be strongly k-connected.
pub fn verify_partition(
    d: &Digraph,
    k: usize,
    v1: &VertexSet,
    v2: &VertexSet,
) -> Result<VerifyReport, VerifyError> {
    if k < 1 {
        return Err(VerifyError::BadCertificate("k must be >= 1".into()));
    }
    let n = d.vertex_count();
    if let Some(&x) = v1.intersection(v2).next() {
        return Err(VerifyError::Overlap(x));
    }
    for &x in v1.iter().chain(v2.iter()) {
        if x >= n {
            return Err(VerifyError::OutOfRange(x, n));
        }
    }
    if v1.is_empty() || v2.is_empty() {
        return Err(VerifyError::EmptyPart);
    }
    let mut checks = Vec::new();
    let mut witnesses = Vec::new();
    let g1 = d.induced(v1).expect("validated");
    let g2 = d.induced(v2).expect("validated");
    let cross = d.bipartite_subgraph(v1, v2).expect("validated");
    for (name, sub) in [
        ("verify.part1", &g1),
        ("verify.part2", &g2),
        ("verify.cross", &cross),
    ] {
        let (check, witness) = subgraph_check(name, sub, k);
        checks.push(check);
        if let Some(w) = witness {
            witnesses.push(w);
        }
    }
    let accepted = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        checks,
        witnesses,
        accepted,
    })
}

/// Assembles a certificate from a verification run plus provenance notes and
/// any additional pipeline check lines.
pub fn build_certificate(
    d: &Digraph,
    params: CertParams,
    v1: &VertexSet,
    v2: &VertexSet,
    provenance: Vec<String>,
) -> Result<PartitionCertificate, VerifyError> {
    let report = verify_partition(d, params.k, v1, v2)?;
    Ok(PartitionCertificate {
        graph_hash: graph_hash(d),
        params,
        v1: v1.iter().copied().collect(),
        v2: v2.iter().copied().collect(),
        accepted: report.accepted,
        checks: report.checks,
        witnesses: report.witnesses,
        provenance,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReVerification {
    pub hash_match: bool,
    pub structural: Vec<CertCheck>,
    pub report: Option<VerifyReport>,
    pub accepted: bool,
    pub agrees_with_certificate: bool,
}

/// Re-verifies a parsed certificate against a graph: hash first, structural
/// invariants second, then the full three-subgraph verification.
pub fn re_verify(d: &Digraph, cert: &PartitionCertificate) -> Result<ReVerification, VerifyError> {
    if cert.checks.is_empty() {
        return Err(VerifyError::BadCertificate("empty check list".into()));
    }
    let hash = graph_hash(d);
    if hash != cert.graph_hash {
        return Ok(ReVerification {
            hash_match: false,
            structural: Vec::new(),
            report: None,
            accepted: false,
            agrees_with_certificate: false,
        });
    }
    let v1: VertexSet = cert.v1.iter().copied().collect();
    let v2: VertexSet = cert.v2.iter().copied().collect();
    let structural = vec![
        CertCheck {
            name: "cert.disjoint".into(),
            bound: 0.0,
            observed: v1.intersection(&v2).count() as f64,
            pass: v1.intersection(&v2).next().is_none(),
        },
        CertCheck {
            name: "cert.sizes".into(),
            bound: (cert.params.n1 + cert.params.n2) as f64,
            observed: (v1.len() + v2.len()) as f64,
            pass: v1.len() == cert.params.n1 && v2.len() == cert.params.n2,
        },
    ];
    if structural.iter().any(|c| !c.pass) {
        return Ok(ReVerification {
            hash_match: true,
            structural,
            report: None,
            accepted: false,
            agrees_with_certificate: !cert.accepted,
        });
    }
    let report = verify_partition(d, cert.params.k, &v1, &v2)?;
    let accepted = report.accepted;
    let cert_verify_passes: Vec<bool> = cert
        .checks
        .iter()
        .filter(|c| c.name.starts_with("verify."))
        .map(|c| c.pass)
        .collect();
    let fresh_passes: Vec<bool> = report.checks.iter().map(|c| c.pass).collect();
    let agrees = accepted == cert.accepted
        && (cert_verify_passes.is_empty() || cert_verify_passes == fresh_passes);
    Ok(ReVerification {
        hash_match: true,
        structural,
        report: Some(report),
        accepted,
        agrees_with_certificate: agrees,
    })
}

/// Witness sets are reported in parent-space ids; deletion-and-reachability
/// revalidation has to happen inside the subgraph the check ran on.
pub fn validate_witness_in_context(
    d: &Digraph,
    v1: &VertexSet,
    v2: &VertexSet,
    w: &NamedWitness,
) -> bool {
    let sub = match w.check.as_str() {
        "verify.part1" => d.induced(v1),
        "verify.part2" => d.induced(v2),
        "verify.cross" => d.bipartite_subgraph(v1, v2),
        _ => return false,
    };
    let Ok(sub) = sub else { return false };
    let local = SeparatorWitness {
        cut: sub.to_local_set(&w.separator.cut),
        side_a: sub.to_local_set(&w.separator.side_a),
        side_b: sub.to_local_set(&w.separator.side_b),
    };
    if local.cut.len() != w.separator.cut.len() {
        return false;
    }
    local.validate(&sub.graph)
}

const BRUTE_FORCE_MAX_N: usize = 16;

fn combinations(pool: &[Vertex], size: usize) -> Vec<VertexSet> {
    fn rec(pool: &[Vertex], start: usize, left: usize, cur: &mut Vec<Vertex>, out: &mut Vec<VertexSet>) {
        if left == 0 {
            out.push(cur.iter().copied().collect());
            return;
        }
        for i in start..pool.len() {
            if pool.len() - i < left {
                break;
            }
            cur.push(pool[i]);
            rec(pool, i + 1, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    let mut cur = Vec::new();
    rec(pool, 0, size, &mut cur, &mut out);
    out
}

/// Exhaustive search for a verifying pair of parts of the requested sizes,
/// in lexicographic order. Doubles as the test oracle for the pipeline and
/// the harness for the two-cycle procedure.
pub fn brute_force_partition(
    d: &Digraph,
    k: usize,
    n1: usize,
    n2: usize,
) -> Result<Option<(VertexSet, VertexSet)>, VerifyError> {
    let n = d.vertex_count();
    if n > BRUTE_FORCE_MAX_N {
        return Err(VerifyError::SizeGuard {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    if n1 == 0 || n2 == 0 || n1 + n2 > n {
        return Err(VerifyError::BadCertificate(format!(
            "invalid part sizes {n1}+{n2} for n={n}"
        )));
    }
    let all: Vec<Vertex> = d.vertices().collect();
    for v1 in combinations(&all, n1) {
        let g1 = d.induced(&v1).expect("in range");
        if !is_strongly_k_connected(&g1.graph, k).expect("k >= 1").0 {
            continue;
        }
        let rest: Vec<Vertex> = all.iter().copied().filter(|v| !v1.contains(v)).collect();
        for v2 in combinations(&rest, n2) {
            if verify_partition(d, k, &v1, &v2)?.accepted {
                return Ok(Some((v1, v2)));
            }
        }
    }
    Ok(None)
}
