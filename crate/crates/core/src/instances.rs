//! Deterministic instance generators.
//!
//! All randomness comes from SplitMix64 with the standard constants
//! (increment 0x9E3779B97F4A7C15, mixers 0xBF58476D1CE4E5B9 and
//! 0x94D049BB133111EB, finisher shifts 30/27/31), so identical parameters
//! yield identical graphs on every platform.

use thiserror::Error;

use crate::digraph::{Digraph, Vertex};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("n must be at least {min} (got {got})")]
    TooSmall { min: usize, got: usize },
    #[error("l must be at least 1")]
    ZeroSlack,
    #[error("could not reach minimum union degree {target} after {tries} seeds")]
    DegreeUnreachable { target: usize, tries: usize },
    #[error("no strongly connected tournament found after {0} seeds")]
    RetriesExhausted(usize),
}

/// SplitMix64. Small, fast, and fully specified by its constants.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    pub fn next_bool(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    /// Uniform in `0..bound` via rejection on the top bits.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }
}

/// Random tournament: each unordered pair oriented by one seeded bit,
/// pairs scanned in (u, v) order with u < v.
pub fn gen_tournament(n: usize, seed: u64) -> Result<Digraph, GenError> {
    if n < 1 {
        return Err(GenError::TooSmall { min: 1, got: n });
    }
    let mut rng = SplitMix64::new(seed);
    let mut arcs: Vec<(Vertex, Vertex)> = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.next_bool() {
                arcs.push((u, v));
            } else {
                arcs.push((v, u));
            }
        }
    }
    Ok(Digraph::new(n, &arcs).expect("tournament arcs are valid"))
}

/// Dense digraph with minimum union degree at least `n - l`.
///
/// Starts from a seeded tournament; for `l >= 2` deletes some single-direction
/// arcs (only while both endpoints stay at union degree >= n - l), then adds
/// reverse arcs at random to create digons. Retries with incremented seeds if
/// the degree floor is ever missed.
pub fn gen_dense_digraph(n: usize, l: usize, seed: u64) -> Result<Digraph, GenError> {
    if l == 0 {
        return Err(GenError::ZeroSlack);
    }
    if n < 1 {
        return Err(GenError::TooSmall { min: 1, got: n });
    }
    let target = n.saturating_sub(l);
    const TRIES: usize = 16;
    for attempt in 0..TRIES {
        let t = gen_tournament(n, seed.wrapping_add(attempt as u64))?;
        let mut rng = SplitMix64::new(seed.wrapping_add(attempt as u64) ^ 0xD1CE);
        let mut present: Vec<Vec<bool>> = vec![vec![false; n]; n];
        for (u, v) in t.arcs() {
            present[u][v] = true;
        }
        let mut union_deg: Vec<usize> = (0..n).map(|v| t.union_degree(v)).collect();
        if l >= 2 {
            #[allow(clippy::needless_range_loop)]
            for u in 0..n {
                for v in (u + 1)..n {
                    let digon_free = present[u][v] != present[v][u];
                    if digon_free
                        && union_deg[u] > target
                        && union_deg[v] > target
                        && rng.next_below(4) == 0
                    {
                        present[u][v] = false;
                        present[v][u] = false;
                        union_deg[u] -= 1;
                        union_deg[v] -= 1;
                    }
                }
            }
        }
        #[allow(clippy::needless_range_loop)]
        for u in 0..n {
            for v in (u + 1)..n {
                if present[u][v] != present[v][u] && rng.next_bool() {
                    present[u][v] = true;
                    present[v][u] = true;
                }
            }
        }
        let mut arcs = Vec::new();
        for (u, row) in present.iter().enumerate() {
            for (v, &has) in row.iter().enumerate() {
                if has {
                    arcs.push((u, v));
                }
            }
        }
        let g = Digraph::new(n, &arcs).expect("generator arcs are valid");
        if n == 1 || g.min_union_degree() >= target {
            return Ok(g);
        }
    }
    Err(GenError::DegreeUnreachable {
        target,
        tries: TRIES,
    })
}

/// Rejection-sample tournaments until one is strongly connected.
pub fn gen_strong_tournament(n: usize, seed: u64) -> Result<Digraph, GenError> {
    if n < 3 {
        return Err(GenError::TooSmall { min: 3, got: n });
    }
    const TRIES: usize = 4096;
    for attempt in 0..TRIES {
        let t = gen_tournament(n, seed.wrapping_add(attempt as u64))?;
        if crate::connectivity::is_strongly_connected(&t) {
            return Ok(t);
        }
    }
    Err(GenError::RetriesExhausted(TRIES))
}
